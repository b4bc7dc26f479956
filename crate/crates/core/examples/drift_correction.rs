//! Drift correction on a three-message burst.
//!
//! The receiver interpolates its own clock against the transmitter's using
//! P1 and P3, so the P2 residual carries only noise and power effects.

use uwb_selfcal::calib::{drift_ratio, drift_residual};
use uwb_selfcal::exchange::{run_burst, Scenario};
use uwb_selfcal::ticks::{ticks_f64_to_meters, PowerDbm};
use uwb_selfcal::PowerBiasModel;

fn main() -> uwb_selfcal::Result<()> {
    let mut s = Scenario::default();
    s.gains.p2_gains_db = vec![0.0];
    // past the crystal warm-up, where the relative drift is steady
    s.timing.start_s = 3600.0;
    s.responder.bias = PowerBiasModel::zero();

    let n = 1000;
    let (mut naive, mut residual) = (0.0, 0.0);
    for i in 0..n {
        let obs = run_burst(&s, i)?.drift_observables()?;
        naive += obs.c12().ticks() as f64;
        residual += drift_residual(&obs);
        if i == 0 {
            println!("relative drift of the first burst: {:.3} ppm", drift_ratio(&obs) * 1e6);
        }
    }
    let n = n as f64;
    println!("mean P2 offset without correction: {:.3} m", ticks_f64_to_meters(naive / n));
    println!("mean residual after interpolation: {:.2e} m", ticks_f64_to_meters(residual / n));

    // the same bursts at a lower P2 gain show the power-dependent bias
    let mut low = Scenario::default();
    low.gains.p2_gains_db = vec![-20.0];
    let b = run_burst(&low, 0)?;
    let p: PowerDbm = b.measured_power[1];
    println!(
        "P2 at -20 dB ({:.1} dBm): residual {:.1} ticks",
        p.dbm(),
        drift_residual(&b.drift_observables()?)
    );
    Ok(())
}
