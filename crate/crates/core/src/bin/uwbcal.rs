use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uwb_selfcal::config::ExperimentKind;
use uwb_selfcal::experiments::{run, Prepared, RunOptions};

#[derive(Parser)]
#[command(name = "uwbcal", version, about = "UWB clock-drift and signal-power calibration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drift correction on constant-power bursts
    DriftDemo(Flags),
    /// Gain sweep, correction curve and power remap
    PowerCalib(Flags),
    /// Calibrated two-way ranging over several distances
    TwrRun(Flags),
    /// Run a recorded timestamp log through calibration and ranging
    Replay(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML experiment configuration
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the scenario seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match cli.command {
        Command::DriftDemo(f) => (ExperimentKind::DriftDemo, f),
        Command::PowerCalib(f) => (ExperimentKind::PowerCalib, f),
        Command::TwrRun(f) => (ExperimentKind::TwrRun, f),
        Command::Replay(f) => (ExperimentKind::Replay, f),
    };
    let options = RunOptions {
        config: flags.config,
        seed: flags.seed,
        out: flags.out,
    };
    match Prepared::new(kind, &options).and_then(|p| run(&p).map(|s| (p, s))) {
        Ok((p, summary)) => {
            println!("{summary}");
            println!("outputs in {}", p.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
