//! Ranging between a reference and a drifting tag, with and without the
//! third message and the power correction curves.

use uwb_selfcal::config::ExperimentConfig;
use uwb_selfcal::exchange::{run_twr, DistanceProfile};
use uwb_selfcal::experiments::{calibrate_pair, twr_scenario};
use uwb_selfcal::ranging::{estimate_z, toa_basic, toa_corrected, ZOffset};
use uwb_selfcal::ticks::Meters;

fn main() -> uwb_selfcal::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario.timing.start_s = 3600.0;
    cfg.twr.calibration_repetitions = 300;
    // gain sweeps at 0.5 m give a correction curve for each station
    let (tag, reference) = calibrate_pair(&cfg)?;

    // the curves are relative to the calibration power, so a constant offset
    // remains; measure it once at a known distance
    let mut s = twr_scenario(&cfg);
    s.distance = DistanceProfile::Constant { meters: 1.0 };
    let known = (0..200)
        .map(|i| toa_corrected(&run_twr(&s, i)?, &tag, &reference, &ZOffset::zero()))
        .collect::<uwb_selfcal::Result<Vec<_>>>()?;
    let z = estimate_z(Meters::new(1.0)?, &known)?;
    println!("offset from 1 m: {:.4} m", z.value_s * uwb_selfcal::ticks::SPEED_OF_LIGHT);

    s.distance = DistanceProfile::Constant { meters: 2.5 };
    s.seed += 1;

    let n = 500;
    let (mut basic, mut corrected) = (Vec::new(), Vec::new());
    for i in 0..n {
        let x = run_twr(&s, i)?;
        basic.push(toa_basic(&x, 0.0, 0.0).range_m);
        corrected.push(toa_corrected(&x, &tag, &reference, &z)?.range_m);
    }
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
        (m, sd)
    };
    let (mb, sb) = stats(&basic);
    let (mc, sc) = stats(&corrected);
    println!("true distance 2.5 m");
    println!("two messages:   mean {mb:.4} m, std {sb:.4} m");
    println!("three messages: mean {mc:.4} m, std {sc:.4} m");

    let x = run_twr(&s, 0)?;
    let e = toa_corrected(&x, &tag, &reference, &z)?;
    println!("components of exchange 0 (s): {:?}", e.components);
    Ok(())
}
