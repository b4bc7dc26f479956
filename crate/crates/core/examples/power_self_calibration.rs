//! Builds a station's power correction curve from a TX gain sweep, then a
//! remap for its compressed power readout.

use uwb_selfcal::calib::{calibrate_power_with, fit_power_remap, CalibrationOptions};
use uwb_selfcal::exchange::{run_sweep, GainSchedule, Scenario};
use uwb_selfcal::ticks::PowerDbm;

fn main() -> uwb_selfcal::Result<()> {
    let s = Scenario {
        repetitions: 500,
        gains: GainSchedule::ladder(0.0, 0.0, -2.0, 21),
        ..Scenario::default()
    };
    let sweep = run_sweep(&s)?;
    let cal = calibrate_power_with(&sweep, &CalibrationOptions::default())?;

    println!("{:>8} {:>10} {:>10} {:>8}", "gain", "P2 dBm", "corr", "se");
    for (step, (p, corr)) in cal.steps.iter().zip(cal.curve.knots()) {
        println!(
            "{:>8.1} {:>10.2} {:>10.2} {:>8.3}",
            step.tx_gain_p2_db, p, corr, step.std_error_ticks
        );
    }
    println!("reference power {:.2} dBm", cal.curve.reference_power_dbm());

    let remap = fit_power_remap(&sweep, 2.0, PowerDbm::new(-85.0)?)?;
    println!(
        "remap: slope {:.4}, fit residual {:.3} dB, valid {:?} dBm",
        remap.slope,
        remap.fit_residual_db,
        remap.validity_dbm()
    );
    for &(measured, actual) in remap.knots.iter().rev().take(3) {
        println!("  reported {measured:.2} dBm is really {actual:.2} dBm");
    }
    Ok(())
}
