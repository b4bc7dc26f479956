//! A tag moving at constant velocity and under constant acceleration.
//!
//! Velocity cancels in the three-message estimate. Acceleration leaves an
//! error of `-a·D·(D + D3)/4`, with `D` the response delay and `D3` the
//! delay before the third message.

use uwb_selfcal::exchange::{run_twr_traced, DistanceProfile, Scenario};
use uwb_selfcal::ranging::{toa_corrected, ZOffset};
use uwb_selfcal::{ClockModel, PowerCorrectionCurve, Station};

fn mean_error(s: &Scenario, n: u64) -> uwb_selfcal::Result<f64> {
    let flat = PowerCorrectionCurve::flat(0, 0.0);
    let mut total = 0.0;
    for i in 0..n {
        let (x, truth) = run_twr_traced(s, i)?;
        let e = toa_corrected(&x, &flat, &flat, &ZOffset::zero())?;
        total += e.range_m - truth.distance[0].get();
    }
    Ok(total / n as f64)
}

fn main() -> uwb_selfcal::Result<()> {
    let mut s = Scenario::ideal(3.0);
    s.responder = Station {
        clock: ClockModel::affine(1.0, 5e-6),
        ..Station::ideal(1)
    };
    s.timing.twr_response_delay_s = 1e-3;
    s.timing.twr_third_delay_s = 1e-3;
    // spreads exchanges over many tick phases
    s.timing.period_s = 1.37e-6;

    s.distance = DistanceProfile::ConstantVelocity { initial_m: 3.0, velocity_mps: 10.0 };
    println!("10 m/s:      mean error {:+.3} mm", mean_error(&s, 400)? * 1e3);

    let a = 1e4;
    s.distance = DistanceProfile::ConstantAcceleration {
        initial_m: 3.0,
        velocity_mps: 0.0,
        accel_mps2: a,
    };
    let d = 1e-3;
    println!(
        "10^4 m/s^2:  mean error {:+.3} mm, expected {:+.3} mm",
        mean_error(&s, 400)? * 1e3,
        -0.25 * a * d * (d + d) * 1e3
    );
    Ok(())
}
