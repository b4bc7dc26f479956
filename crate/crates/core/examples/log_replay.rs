//! Writes simulated bursts as a timestamp log, reads it back and calibrates
//! from the file alone.

use uwb_selfcal::calib::calibrate_power;
use uwb_selfcal::exchange::{group_by_gain, run_burst, GainSchedule, Scenario};
use uwb_selfcal::logfile::{burst_to_log, read_curve, read_log, write_curve, write_log, Provenance};

fn main() -> uwb_selfcal::Result<()> {
    let s = Scenario {
        repetitions: 200,
        gains: GainSchedule::ladder(0.0, 0.0, -3.0, 8),
        ..Scenario::default()
    };
    let bursts = (0..s.sweep_len() as u64)
        .map(|i| run_burst(&s, i))
        .collect::<uwb_selfcal::Result<Vec<_>>>()?;

    let dir = std::env::temp_dir().join("uwb-selfcal-log-replay");
    std::fs::create_dir_all(&dir)?;
    let prov = Provenance {
        command: "log_replay".into(),
        config_sha256: String::new(),
        seed: s.seed,
        radio: s.radio.clone(),
    };
    let log = dir.join("log.csv");
    write_log(&log, &prov, bursts.iter().flat_map(burst_to_log))?;

    let parsed = read_log(&log)?;
    println!(
        "{}: {} bursts, {} exchanges, {} incomplete",
        log.display(),
        parsed.bursts.len(),
        parsed.exchanges.len(),
        parsed.skipped.len()
    );
    let curve = calibrate_power(&group_by_gain(parsed.bursts))?;
    let path = dir.join("curve.csv");
    write_curve(&path, &prov, &curve)?;
    assert_eq!(read_curve(&path)?, curve);
    for (p, c) in curve.knots() {
        println!("{p:8.2} dBm  {c:+7.2} ticks");
    }
    Ok(())
}
