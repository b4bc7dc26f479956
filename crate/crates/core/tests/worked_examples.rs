//! End-to-end checks of the documented examples for ranging, drift
//! estimation and power calibration, each against a closed-form oracle.

use uwb_selfcal::calib::{
    calibrate_power_with, drift_ratio, fit_power_remap, CalibrationOptions, PowerCalibration,
};
use uwb_selfcal::exchange::{
    run_sweep, run_twr, run_twr_traced, DistanceProfile, GainSchedule, Scenario, Station, PAPER_SCALE_JITTER_S,
};
use uwb_selfcal::models::{ClockModel, PowerBiasModel, PowerMeasurementModel};
use uwb_selfcal::ranging::{estimate_z, toa_basic, toa_corrected, ZOffset};
use uwb_selfcal::ticks::{Meters, PowerDbm, METERS_PER_TICK, SPEED_OF_LIGHT, TICK_PERIOD_S};
use uwb_selfcal::{run_burst, PowerCorrectionCurve};

fn station(id: u16, clock: ClockModel) -> Station {
    Station {
        clock,
        ..Station::ideal(id)
    }
}

fn flat() -> PowerCorrectionCurve {
    PowerCorrectionCurve::flat(1, -60.0)
}

#[test]
fn ideal_exchange_at_three_meters() {
    let s = Scenario::ideal(3.0);
    let x = run_twr(&s, 0).unwrap();
    let truth = 3.0 / SPEED_OF_LIGHT;
    assert!((truth - 10.007e-9).abs() < 1e-12);
    let basic = toa_basic(&x, 0.0, 0.0);
    assert!((basic.toa_s - truth).abs() <= TICK_PERIOD_S);
    assert_eq!(basic.toa_s, basic.components.raw_half_s);
    let corrected = toa_corrected(&x, &flat(), &flat(), &ZOffset::zero()).unwrap();
    assert!((corrected.toa_s - truth).abs() <= TICK_PERIOD_S);
}

#[test]
fn ideal_corrected_at_one_and_a_half_meters() {
    let s = Scenario::ideal(1.5);
    for i in 0..50 {
        let x = run_twr(&s, i).unwrap();
        let e = toa_corrected(&x, &flat(), &flat(), &ZOffset::zero()).unwrap();
        assert!((e.toa_s - 1.5 / SPEED_OF_LIGHT).abs() <= TICK_PERIOD_S, "exchange {i}");
    }
}

#[test]
fn uncorrected_drift_error_at_two_milliseconds() {
    let r = 5e-6;
    let delay = 2e-3;
    let mut s = Scenario::ideal(3.0);
    s.responder = station(1, ClockModel::affine(0.0, r));
    s.timing.twr_response_delay_s = delay;
    // a fast tag overstates its own turnaround, so the range comes out short
    let oracle = -0.5 * SPEED_OF_LIGHT * r * delay;
    assert!((oracle + 1.499).abs() < 1e-3);
    let errors: Vec<f64> = (0..20)
        .map(|i| toa_basic(&run_twr(&s, i).unwrap(), 0.0, 0.0).range_m - 3.0)
        .collect();
    for e in &errors {
        assert!((e - oracle).abs() <= 2.0 * METERS_PER_TICK, "{e} vs {oracle}");
    }
    let corrected = toa_corrected(&run_twr(&s, 0).unwrap(), &flat(), &flat(), &ZOffset::zero()).unwrap();
    assert!((corrected.range_m - 3.0).abs() <= 2.0 * METERS_PER_TICK);
}

#[test]
fn symmetric_biases_cancel() {
    let mut s = Scenario::ideal(2.0);
    let bias = PowerBiasModel::from_ticks(vec![(-100.0, 30.0), (-90.0, 10.0), (-50.0, 10.0), (-45.0, 0.0)]).unwrap();
    s.initiator.bias = bias.clone();
    s.responder.bias = bias;
    let x = run_twr(&s, 0).unwrap();
    let e = toa_basic(&x, 0.0, 0.0);
    // each leg is 10 ticks late: the round trip is long by 10 and the
    // turnaround short by 10
    let expected = 2.0 / SPEED_OF_LIGHT + 10.0 * TICK_PERIOD_S;
    assert!((e.toa_s - expected).abs() <= TICK_PERIOD_S);
    let unbiased = toa_basic(&x, 10.0, 10.0);
    assert!((unbiased.toa_s - 2.0 / SPEED_OF_LIGHT).abs() <= TICK_PERIOD_S);
}

#[test]
fn z_offset_examples() {
    let mut s = Scenario::ideal(2.0);
    s.initiator.clock.jitter_sigma_s = PAPER_SCALE_JITTER_S;
    let estimates: Vec<_> = (0..100)
        .map(|i| toa_corrected(&run_twr(&s, i).unwrap(), &flat(), &flat(), &ZOffset::zero()).unwrap())
        .collect();
    let d = Meters::new(2.0).unwrap();
    let z = estimate_z(d, &estimates).unwrap();
    assert!(z.value_s.abs() * SPEED_OF_LIGHT < 0.01);

    // a constant +0.3 m offset in the measurement, e.g. antenna delays
    let shifted: Vec<_> = estimates
        .iter()
        .map(|e| {
            let mut e = *e;
            e.components.raw_half_s += 0.3 / SPEED_OF_LIGHT;
            e.with_z(&ZOffset::zero())
        })
        .collect();
    let z_shift = estimate_z(d, &shifted).unwrap();
    assert!((z_shift.value_s - (z.value_s - 0.3 / SPEED_OF_LIGHT)).abs() < 1e-21);
    let fixed: Vec<f64> = shifted.iter().map(|e| e.with_z(&z_shift).range_m).collect();
    assert!((fixed.iter().sum::<f64>() / fixed.len() as f64 - 2.0).abs() < 1e-9);

    let one = estimate_z(d, &estimates[..1]).unwrap();
    assert!((one.value_s - (2.0 / SPEED_OF_LIGHT - estimates[0].toa_without_z())).abs() < 1e-20);
}

#[test]
fn constant_velocity_is_absorbed() {
    let mut s = Scenario::ideal(3.0);
    s.responder = station(1, ClockModel::affine(1.0, 5e-6));
    s.distance = DistanceProfile::ConstantVelocity {
        initial_m: 3.0,
        velocity_mps: 10.0,
    };
    s.timing.period_s = 1.37e-6;
    let n = 200;
    let mut total = 0.0;
    for i in 0..n {
        let (x, truth) = run_twr_traced(&s, i).unwrap();
        let e = toa_corrected(&x, &flat(), &flat(), &ZOffset::zero()).unwrap();
        total += e.range_m - truth.distance[0].get();
    }
    assert!((total / n as f64).abs() < METERS_PER_TICK);
}

#[test]
fn drift_ratio_examples() {
    let s = Scenario::ideal(1.5);
    let b = run_burst(&s, 0).unwrap();
    assert_eq!(drift_ratio(&b.drift_observables().unwrap()), 0.0);

    let mut s = Scenario::ideal(1.5);
    s.responder = station(1, ClockModel::affine(0.5, 5e-6));
    s.timing.burst_gap_12_s = 2e-3;
    s.timing.burst_gap_23_s = 2e-3;
    let b = run_burst(&s, 0).unwrap();
    let o = b.drift_observables().unwrap();
    let dt13 = o.dt13_tx.ticks() as f64;
    assert!((drift_ratio(&o) - 5e-6).abs() <= 1.0 / dt13 + 1e-12);
}

#[test]
fn drift_ratio_estimator_spread() {
    let sigma = 200e-12;
    let n = 4000;
    let mut s = Scenario::ideal(1.5);
    s.responder = station(1, ClockModel::affine(0.5, 5e-6).with_jitter(sigma));
    s.timing.burst_gap_12_s = 2e-3;
    s.timing.burst_gap_23_s = 2e-3;
    s.repetitions = n;
    let ratios: Vec<f64> = (0..n as u64)
        .map(|i| drift_ratio(&run_burst(&s, i).unwrap().drift_observables().unwrap()))
        .collect();
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let sd = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let se = sd / (n as f64).sqrt();
    let bound = sigma * 2f64.sqrt() / (4e-3 * (n as f64).sqrt());
    // the sample estimate of the spread itself scatters by 1/sqrt(2n)
    assert!(se <= bound * (1.0 + 3.0 / (2.0 * n as f64).sqrt()), "{se} vs {bound}");
    assert!((mean - 5e-6).abs() < 4.0 * bound);
}

fn sweep_scenario(gains: GainSchedule) -> Scenario {
    let mut s = Scenario::default();
    s.gains = gains;
    s.initiator.clock.jitter_sigma_s = PAPER_SCALE_JITTER_S;
    s.responder.clock.jitter_sigma_s = PAPER_SCALE_JITTER_S;
    s
}

/// Largest knot error in units of its standard error, against the injected
/// bias difference.
fn worst_knot_z_score(s: &Scenario, cal: &PowerCalibration) -> f64 {
    let d = s.distance.at(s.record_start(0)).unwrap();
    let bias = |gain: f64| s.responder.bias.bias_ticks(s.channel.rx_power(d, gain).unwrap());
    let reference = bias(s.gains.reference_gain_db);
    let top_se = cal.steps.last().unwrap().std_error_ticks;
    cal.steps
        .iter()
        .zip(cal.curve.knots())
        .map(|(step, &(_, knot))| {
            let injected = -(bias(step.tx_gain_p2_db) - reference);
            let se = (step.std_error_ticks.powi(2) + top_se.powi(2)).sqrt().max(1e-12);
            (knot - injected).abs() / se
        })
        .fold(0.0, f64::max)
}

#[test]
fn zero_bias_gives_flat_curve() {
    let mut s = sweep_scenario(GainSchedule::ladder(0.0, 0.0, -1.0, 31));
    s.responder.bias = PowerBiasModel::zero();
    let cal = calibrate_power_with(&run_sweep(&s).unwrap(), &CalibrationOptions::default()).unwrap();
    assert!(worst_knot_z_score(&s, &cal) < 4.0);
    assert!(cal.curve.knots().iter().all(|k| k.1.abs() < 0.5));
}

#[test]
fn default_curve_recovered_with_half_db_steps() {
    let s = sweep_scenario(GainSchedule::default());
    let cal = calibrate_power_with(&run_sweep(&s).unwrap(), &CalibrationOptions::default()).unwrap();
    assert_eq!(cal.curve.knots().len(), 81);
    let z = worst_knot_z_score(&s, &cal);
    assert!(z < 3.0, "worst knot {z:.2} SE");
}

#[test]
fn default_curve_recovered_with_three_db_steps() {
    let s = sweep_scenario(GainSchedule::ladder(0.0, 0.0, -3.0, 14));
    let cal = calibrate_power_with(&run_sweep(&s).unwrap(), &CalibrationOptions::default()).unwrap();
    assert_eq!(cal.curve.knots().len(), 14);
    let z = worst_knot_z_score(&s, &cal);
    assert!(z < 3.0, "worst knot {z:.2} SE");
}

#[test]
fn remap_examples() {
    let threshold = PowerDbm::new(-85.0).unwrap();
    let mut s = Scenario::default();
    s.repetitions = 300;
    s.responder.measurement = PowerMeasurementModel::identity();
    let ident = fit_power_remap(&run_sweep(&s).unwrap(), 0.5, threshold).unwrap();
    assert!((ident.slope - 1.0).abs() < 1e-3);
    assert!(ident.knots.iter().all(|(m, a)| (m - a).abs() < 0.05));

    s.responder.measurement = PowerMeasurementModel::default();
    let soft = fit_power_remap(&run_sweep(&s).unwrap(), 0.5, threshold).unwrap();
    for &(m, a) in &soft.knots {
        if m > -84.0 {
            assert!(a > m, "{m} -> {a}");
        } else if m < -86.0 {
            assert!((a - m).abs() < 0.05, "{m} -> {a}");
        }
    }
}
