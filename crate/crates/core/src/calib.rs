//! Drift correction across a three-message burst and signal-power
//! self-calibration.
//!
//! A burst gives two transmitter spans `ΔT_tx(1,2)`, `ΔT_tx(1,3)` and the
//! matching receiver spans. Their differences `C(1,2)` and `C(1,3)` are the
//! accumulated clock disagreement. Because drift is linear over a few
//! milliseconds, `C(1,3)` scaled to the P2 instant predicts the drift part of
//! `C(1,2)`; what remains is the P2 timestamp error relative to P1/P3.
//!
//! Sweeping P2's transmit gain while P1/P3 stay fixed turns that residual into
//! a curve of timestamp error against P2's reported power. The curve is
//! relative to the P1/P3 power: the absolute zero of the bias cannot be
//! observed this way and ends up in the ranging offset instead.

use crate::exchange::GainStep;
use crate::pwl;
use crate::ticks::{PowerDbm, TickSpan};
use crate::{Error, Result};

/// Transmitter and receiver spans of one burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriftObservables {
    pub dt12_tx: TickSpan,
    pub dt13_tx: TickSpan,
    pub dt12_rx: TickSpan,
    pub dt13_rx: TickSpan,
}

impl DriftObservables {
    pub fn new(dt12_tx: TickSpan, dt13_tx: TickSpan, dt12_rx: TickSpan, dt13_rx: TickSpan) -> Result<Self> {
        if dt13_tx.ticks() == 0 {
            return Err(Error::MalformedBurst("zero P1-P3 transmit span".into()));
        }
        if !(dt13_tx > dt12_tx && dt12_tx.ticks() > 0) {
            return Err(Error::MalformedBurst(format!(
                "transmit spans out of order: dt12 = {dt12_tx}, dt13 = {dt13_tx}"
            )));
        }
        Ok(Self {
            dt12_tx,
            dt13_tx,
            dt12_rx,
            dt13_rx,
        })
    }

    pub fn c12(&self) -> TickSpan {
        self.dt12_rx - self.dt12_tx
    }

    pub fn c13(&self) -> TickSpan {
        self.dt13_rx - self.dt13_tx
    }
}

/// `C(1,2) − C(1,3)·ΔT_tx(1,2)/ΔT_tx(1,3)` in (fractional) ticks.
pub fn drift_residual(obs: &DriftObservables) -> f64 {
    let c12 = obs.c12().ticks() as i128;
    let c13 = obs.c13().ticks() as i128;
    let dt12 = obs.dt12_tx.ticks() as i128;
    let dt13 = obs.dt13_tx.ticks() as i128;
    // numerator is exact in integers; one rounding in the division
    (c12 * dt13 - c13 * dt12) as f64 / dt13 as f64
}

/// Fractional frequency of the receiver relative to the transmitter.
pub fn drift_ratio(obs: &DriftObservables) -> f64 {
    obs.c13().ticks() as f64 / obs.dt13_tx.ticks() as f64
}

/// Per-step outlier rejection on drift residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OutlierGate {
    #[default]
    Off,
    /// Drop residuals further than `k` scaled median absolute deviations from
    /// the step median.
    Mad { k: f64 },
}

/// Averages for one P2 gain step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub tx_gain_p2_db: f64,
    pub n: usize,
    pub mean_residual_ticks: f64,
    pub std_error_ticks: f64,
    pub mean_power_p1_dbm: f64,
    pub mean_power_p2_dbm: f64,
    pub mean_power_p3_dbm: f64,
}

/// Mean that does not depend on the order of `values`.
fn order_free_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn order_free_std_error(values: &mut [f64], mean: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    sq.sort_by(f64::total_cmp);
    (sq.iter().sum::<f64>() / (n - 1) as f64).sqrt() / (n as f64).sqrt()
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn keep_mask(residuals: &[f64], gate: OutlierGate) -> Vec<bool> {
    match gate {
        OutlierGate::Off => vec![true; residuals.len()],
        OutlierGate::Mad { k } => {
            let mut sorted = residuals.to_vec();
            sorted.sort_by(f64::total_cmp);
            let med = median(&sorted);
            let mut dev: Vec<f64> = sorted.iter().map(|r| (r - med).abs()).collect();
            dev.sort_by(f64::total_cmp);
            let mad = 1.4826 * median(&dev);
            if mad == 0.0 {
                return vec![true; residuals.len()];
            }
            residuals.iter().map(|r| (r - med).abs() <= k * mad).collect()
        }
    }
}

/// Step averages, ordered by ascending P2 gain.
pub fn summarize_steps(sweep: &[GainStep], gate: OutlierGate) -> Result<Vec<StepStats>> {
    let mut stats = Vec::with_capacity(sweep.len());
    for step in sweep {
        if step.records.is_empty() {
            return Err(Error::Calibration(format!("gain step {} dB has no bursts", step.tx_gain_p2_db)));
        }
        let residuals = step
            .records
            .iter()
            .map(|r| r.drift_observables().map(|o| drift_residual(&o)))
            .collect::<Result<Vec<f64>>>()?;
        let keep = keep_mask(&residuals, gate);
        let pick = |f: &dyn Fn(usize) -> f64| -> Vec<f64> {
            (0..residuals.len()).filter(|&i| keep[i]).map(f).collect()
        };
        let mut res = pick(&|i| residuals[i]);
        let mut p1 = pick(&|i| step.records[i].measured_power[0].dbm());
        let mut p2 = pick(&|i| step.records[i].measured_power[1].dbm());
        let mut p3 = pick(&|i| step.records[i].measured_power[2].dbm());
        let mean = order_free_mean(&mut res);
        stats.push(StepStats {
            tx_gain_p2_db: step.tx_gain_p2_db,
            n: res.len(),
            mean_residual_ticks: mean,
            std_error_ticks: order_free_std_error(&mut res, mean),
            mean_power_p1_dbm: order_free_mean(&mut p1),
            mean_power_p2_dbm: order_free_mean(&mut p2),
            mean_power_p3_dbm: order_free_mean(&mut p3),
        });
    }
    stats.sort_by(|a, b| a.tx_gain_p2_db.total_cmp(&b.tx_gain_p2_db));
    if stats.windows(2).any(|w| w[0].tx_gain_p2_db == w[1].tx_gain_p2_db) {
        return Err(Error::Calibration("duplicate P2 gain steps".into()));
    }
    Ok(stats)
}

/// Timestamp correction as a function of reported receive power, for one
/// receiving station.
///
/// Knots hold `(reported dBm, correction ticks)`. Adding the correction to a
/// receive timestamp taken at that power removes its bias relative to a
/// timestamp taken at `reference_power_dbm`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCorrectionCurve {
    station_id: u16,
    reference_power_dbm: f64,
    knots: Vec<(f64, f64)>,
}

/// Result of a curve lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub ticks: f64,
    /// The power lay outside the calibrated range and the end value was used.
    pub clamped: bool,
}

impl PowerCorrectionCurve {
    pub fn new(station_id: u16, reference_power_dbm: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("correction curve", "needs at least one knot"));
        }
        if !reference_power_dbm.is_finite() || !pwl::is_strictly_increasing(&knots) {
            return Err(Error::invalid(
                "correction curve",
                "knot powers must be finite and strictly increasing",
            ));
        }
        Ok(Self {
            station_id,
            reference_power_dbm,
            knots,
        })
    }

    /// A curve that corrects nothing.
    pub fn flat(station_id: u16, reference_power_dbm: f64) -> Self {
        Self {
            station_id,
            reference_power_dbm,
            knots: vec![(reference_power_dbm, 0.0)],
        }
    }

    pub fn station_id(&self) -> u16 {
        self.station_id
    }

    pub fn reference_power_dbm(&self) -> f64 {
        self.reference_power_dbm
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn lookup(&self, measured: PowerDbm) -> Correction {
        let (ticks, clamped) = pwl::interpolate(&self.knots, measured.dbm());
        Correction { ticks, clamped }
    }

    /// Estimated timestamp bias (late is positive) relative to the reference
    /// power; the negative of the correction.
    pub fn relative_bias_ticks(&self, measured: PowerDbm) -> f64 {
        -self.lookup(measured).ticks
    }
}

pub fn lookup_correction(curve: &PowerCorrectionCurve, measured: PowerDbm) -> Correction {
    curve.lookup(measured)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CalibrationOptions {
    pub outlier_gate: OutlierGate,
}

/// Curve plus the step averages it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCalibration {
    pub steps: Vec<StepStats>,
    pub curve: PowerCorrectionCurve,
}

fn sweep_stations(sweep: &[GainStep]) -> Result<(u16, u16)> {
    let mut records = sweep.iter().flat_map(|s| s.records.iter());
    let first = records
        .next()
        .ok_or_else(|| Error::Calibration("sweep has no bursts".into()))?;
    let ids = (first.tx_station, first.rx_station);
    for r in sweep.iter().flat_map(|s| s.records.iter()) {
        if (r.tx_station, r.rx_station) != ids {
            return Err(Error::Calibration("sweep mixes station pairs".into()));
        }
        if r.tx_gain_ref_db.to_bits() != first.tx_gain_ref_db.to_bits() {
            return Err(Error::Calibration("P1/P3 gain changes across the sweep".into()));
        }
    }
    Ok(ids)
}

/// Builds the receiving station's correction curve from a gain sweep.
pub fn calibrate_power(sweep: &[GainStep]) -> Result<PowerCorrectionCurve> {
    calibrate_power_with(sweep, &CalibrationOptions::default()).map(|c| c.curve)
}

pub fn calibrate_power_with(sweep: &[GainStep], options: &CalibrationOptions) -> Result<PowerCalibration> {
    if sweep.len() < 3 {
        return Err(Error::Calibration(format!("need at least 3 gain steps, got {}", sweep.len())));
    }
    let (_, rx_station) = sweep_stations(sweep)?;
    let steps = summarize_steps(sweep, options.outlier_gate)?;
    for w in steps.windows(2) {
        if !(w[0].mean_power_p2_dbm < w[1].mean_power_p2_dbm) {
            return Err(Error::Calibration(format!(
                "reported P2 power is not increasing with gain between {} dB ({:.3} dBm) and {} dB ({:.3} dBm); \
                 suspect message interference or insufficient averaging",
                w[0].tx_gain_p2_db, w[0].mean_power_p2_dbm, w[1].tx_gain_p2_db, w[1].mean_power_p2_dbm
            )));
        }
    }
    let mut reference: Vec<f64> = sweep
        .iter()
        .flat_map(|s| s.records.iter().map(|r| r.reference_power()))
        .collect();
    let reference_power = order_free_mean(&mut reference);

    let mut knots: Vec<(f64, f64)> = steps
        .iter()
        .map(|s| (s.mean_power_p2_dbm, -s.mean_residual_ticks))
        .collect();
    let (at_reference, _) = pwl::interpolate(&knots, reference_power);
    for k in &mut knots {
        k.1 -= at_reference;
    }
    let curve = PowerCorrectionCurve::new(rx_station, reference_power, knots)?;
    Ok(PowerCalibration { steps, curve })
}

/// Map from reported to actual receive power.
///
/// Below the distortion threshold the reported power is trusted, so a line
/// fitted there against the known TX gain ladder predicts the actual power at
/// every step; pairing those predictions with the reported powers gives the
/// correction for the distorted region.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRemap {
    pub station_id: u16,
    /// dB of actual power per dB of TX gain.
    pub slope: f64,
    /// Actual power at the lowest gain step.
    pub intercept_dbm: f64,
    /// RMS residual of the line fit.
    pub fit_residual_db: f64,
    /// `(reported dBm, actual dBm)` per step.
    pub knots: Vec<(f64, f64)>,
}

impl PowerRemap {
    pub fn new(station_id: u16, slope: f64, intercept_dbm: f64, fit_residual_db: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        if !(slope.is_finite() && intercept_dbm.is_finite() && fit_residual_db.is_finite()) {
            return Err(Error::invalid("power remap", "fit parameters must be finite"));
        }
        if knots.is_empty() || !pwl::is_strictly_increasing(&knots) {
            return Err(Error::invalid("power remap", "reported powers must be strictly increasing"));
        }
        Ok(Self {
            station_id,
            slope,
            intercept_dbm,
            fit_residual_db,
            knots,
        })
    }

    /// Reported-power range the remap was fitted over.
    pub fn validity_dbm(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    /// Actual power for a reported power; extrapolates linearly outside the
    /// fitted range and flags it.
    pub fn actual(&self, measured: PowerDbm) -> (f64, bool) {
        let m = measured.dbm();
        let k = &self.knots;
        let n = k.len();
        if n >= 2 && m > k[n - 1].0 {
            let (x0, y0) = k[n - 2];
            let (x1, y1) = k[n - 1];
            return (y1 + (m - x1) * (y1 - y0) / (x1 - x0), true);
        }
        if m < k[0].0 {
            return (m + (k[0].1 - k[0].0), true);
        }
        pwl::interpolate(k, m)
    }
}

/// Fits the reported-to-actual power map from a gain sweep whose P2 gains
/// form a uniform ladder of `tx_step_db`.
pub fn fit_power_remap(sweep: &[GainStep], tx_step_db: f64, linear_threshold: PowerDbm) -> Result<PowerRemap> {
    let step = tx_step_db.abs();
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Calibration("TX gain step must be non-zero".into()));
    }
    let (_, rx_station) = sweep_stations(sweep)?;
    let stats = summarize_steps(sweep, OutlierGate::Off)?;
    let lowest = stats[0].tx_gain_p2_db;
    let ladder: Vec<f64> = (0..stats.len()).map(|k| k as f64 * step).collect();
    for (s, x) in stats.iter().zip(&ladder) {
        let off = (s.tx_gain_p2_db - lowest) - x;
        if off.abs() > 1e-6 * (1.0 + x) {
            return Err(Error::Calibration(format!(
                "gain {} dB is not on the {step} dB ladder",
                s.tx_gain_p2_db
            )));
        }
    }
    let linear: Vec<(f64, f64)> = stats
        .iter()
        .zip(&ladder)
        .filter(|(s, _)| s.mean_power_p2_dbm < linear_threshold.dbm())
        .map(|(s, &x)| (x, s.mean_power_p2_dbm))
        .collect();
    if linear.len() < 3 {
        return Err(Error::Calibration(format!(
            "need at least 3 steps below {} dBm to fit the power line, got {}",
            linear_threshold.dbm(),
            linear.len()
        )));
    }
    let (slope, intercept) = least_squares_line(&linear);
    let ss: f64 = linear
        .iter()
        .map(|&(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let residual = (ss / linear.len() as f64).sqrt();
    let knots: Vec<(f64, f64)> = stats
        .iter()
        .zip(&ladder)
        .map(|(s, &x)| (s.mean_power_p2_dbm, intercept + slope * x))
        .collect();
    PowerRemap::new(rx_station, slope, intercept, residual, knots)
        .map_err(|e| Error::Calibration(format!("reported powers do not increase along the ladder: {e}")))
}

/// Ordinary least-squares `y = intercept + slope·x`.
fn least_squares_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{BurstRecord, GainStep};
    use crate::ticks::TickTime;

    fn span(v: i64) -> TickSpan {
        TickSpan::new(v).unwrap()
    }

    #[test]
    fn residual_examples() {
        // no P1-P3 drift: residual is C12 itself
        let o = DriftObservables::new(span(1000), span(2000), span(1007), span(2000)).unwrap();
        assert_eq!(drift_residual(&o), 7.0);
        assert_eq!(drift_ratio(&o), 0.0);
        // affine: C12 = r·dt12, C13 = r·dt13 cancels
        let o = DriftObservables::new(span(1_000_000), span(2_000_000), span(1_000_005), span(2_000_010)).unwrap();
        assert_eq!(drift_residual(&o), 0.0);
        assert_eq!(drift_ratio(&o), 5e-6);
    }

    #[test]
    fn malformed_spans() {
        assert!(matches!(
            DriftObservables::new(span(0), span(0), span(1), span(2)),
            Err(Error::MalformedBurst(_))
        ));
        assert!(DriftObservables::new(span(10), span(5), span(1), span(2)).is_err());
        assert!(DriftObservables::new(span(-1), span(5), span(1), span(2)).is_err());
    }

    #[test]
    fn curve_lookup() {
        let c = PowerCorrectionCurve::new(1, -60.0, vec![(-90.0, -40.0), (-75.0, -10.0), (-60.0, 0.0)]).unwrap();
        assert_eq!(c.lookup(PowerDbm::new(-60.0).unwrap()).ticks, 0.0);
        assert_eq!(c.lookup(PowerDbm::new(-75.0).unwrap()).ticks, -10.0);
        let mid = c.lookup(PowerDbm::new(-82.5).unwrap());
        assert!((mid.ticks + 25.0).abs() < 1e-12 && !mid.clamped);
        let low = c.lookup(PowerDbm::new(-100.0).unwrap());
        assert!(low.clamped && low.ticks == -40.0);
        assert!(PowerCorrectionCurve::new(1, -60.0, vec![]).is_err());
        assert!(PowerCorrectionCurve::new(1, -60.0, vec![(-70.0, 0.0), (-80.0, 1.0)]).is_err());
        let flat = PowerCorrectionCurve::flat(4, -65.0);
        assert_eq!(flat.lookup(PowerDbm::new(-99.0).unwrap()).ticks, 0.0);
    }

    fn record(id: u64, gain: f64, c12: i64, powers: [f64; 3]) -> BurstRecord {
        let t = |v: u64| TickTime::new(v).unwrap();
        BurstRecord {
            id,
            tx_station: 2,
            rx_station: 1,
            tx_times: [t(0), t(1000), t(2000)],
            rx_times: [t(50), t((1050 + c12) as u64), t(2050)],
            measured_power: powers.map(|p| PowerDbm::new(p).unwrap()),
            tx_gain_ref_db: 0.0,
            tx_gain_p2_db: gain,
        }
    }

    fn synthetic_sweep() -> Vec<GainStep> {
        // bias grows by 4 ticks per 3 dB below the reference
        (0..4)
            .map(|k| {
                let gain = -3.0 * k as f64;
                GainStep {
                    tx_gain_p2_db: gain,
                    records: (0..3)
                        .map(|i| record(k * 3 + i, gain, 4 * k as i64, [-60.0, -60.0 + gain, -60.0]))
                        .collect(),
                }
            })
            .collect()
    }

    #[test]
    fn calibrate_synthetic_sweep() {
        let cal = calibrate_power_with(&synthetic_sweep(), &CalibrationOptions::default()).unwrap();
        assert_eq!(cal.curve.reference_power_dbm(), -60.0);
        assert_eq!(cal.curve.station_id(), 1);
        let expected = [(-69.0, -12.0), (-66.0, -8.0), (-63.0, -4.0), (-60.0, 0.0)];
        assert_eq!(cal.curve.knots(), &expected);
        assert_eq!(cal.steps[0].n, 3);
        assert_eq!(cal.steps[0].std_error_ticks, 0.0);
    }

    #[test]
    fn calibrate_rejects_non_monotone_power() {
        let mut sweep = synthetic_sweep();
        for r in &mut sweep[1].records {
            r.measured_power[1] = PowerDbm::new(-75.0).unwrap();
        }
        assert!(matches!(calibrate_power(&sweep), Err(Error::Calibration(_))));
        assert!(calibrate_power(&sweep[..2]).is_err());
        let mut sweep = synthetic_sweep();
        sweep[2].records[0].tx_gain_ref_db = 1.0;
        assert!(calibrate_power(&sweep).is_err());
    }

    #[test]
    fn calibrate_ignores_repetition_order() {
        let mut sweep = synthetic_sweep();
        sweep[1].records[0].rx_times[1] = TickTime::new(1055).unwrap();
        let a = calibrate_power(&sweep).unwrap();
        for s in &mut sweep {
            s.records.reverse();
        }
        sweep.reverse();
        assert_eq!(a, calibrate_power(&sweep).unwrap());
    }

    #[test]
    fn mad_gate_drops_outliers() {
        // step at -9 dB: residuals 12 +/- 1 and one at 500
        let mut records: Vec<_> = (0..8)
            .map(|i| record(i, -9.0, 11 + (i % 3) as i64, [-60.0, -69.0, -60.0]))
            .collect();
        records.push(record(8, -9.0, 500, [-60.0, -69.0, -60.0]));
        let mut sweep = synthetic_sweep();
        sweep[3].records = records;
        let plain = summarize_steps(&sweep, OutlierGate::Off).unwrap();
        let gated = summarize_steps(&sweep, OutlierGate::Mad { k: 5.0 }).unwrap();
        assert_eq!(plain[0].tx_gain_p2_db, -9.0);
        assert!(plain[0].mean_residual_ticks > 50.0);
        assert_eq!(gated[0].n, 8);
        assert!((gated[0].mean_residual_ticks - 11.875).abs() < 1e-12);
    }

    #[test]
    fn remap_identity_and_knee() {
        // identity reporting, 1 dB ladder from -100 dBm
        let mk = |f: &dyn Fn(f64) -> f64| -> Vec<GainStep> {
            (0..20)
                .map(|k| {
                    let gain = -(k as f64);
                    let actual = -81.0 + gain;
                    GainStep {
                        tx_gain_p2_db: gain,
                        records: vec![record(k, gain, 0, [-60.0, f(actual), -60.0])],
                    }
                })
                .collect()
        };
        let remap = fit_power_remap(&mk(&|a| a), 1.0, PowerDbm::new(-85.0).unwrap()).unwrap();
        assert!((remap.slope - 1.0).abs() < 1e-12);
        for &(m, a) in &remap.knots {
            assert!((m - a).abs() < 1e-9);
        }
        // actual = measured + 0.5 (measured + 85) above the knee
        let squash = |a: f64| if a > -85.0 { -85.0 + (a + 85.0) / 1.5 } else { a };
        let remap = fit_power_remap(&mk(&squash), -1.0, PowerDbm::new(-85.0).unwrap()).unwrap();
        for &(m, a) in &remap.knots {
            let oracle = if m > -85.0 { m + 0.5 * (m + 85.0) } else { m };
            assert!((a - oracle).abs() < 1e-9, "{m} {a} {oracle}");
        }
        let (a, flagged) = remap.actual(PowerDbm::new(-84.0).unwrap());
        assert!((a + 83.5).abs() < 1e-9 && !flagged);
        assert!(remap.actual(PowerDbm::new(-20.0).unwrap()).1);
    }

    #[test]
    fn remap_needs_linear_points() {
        let sweep: Vec<GainStep> = (0..5)
            .map(|k| GainStep {
                tx_gain_p2_db: -(k as f64),
                records: vec![record(k, -(k as f64), 0, [-60.0, -70.0 - k as f64, -60.0])],
            })
            .collect();
        assert!(fit_power_remap(&sweep, 1.0, PowerDbm::new(-85.0).unwrap()).is_err());
        assert!(fit_power_remap(&sweep, 2.0, PowerDbm::new(-60.0).unwrap()).is_err());
        assert!(fit_power_remap(&sweep, 1.0, PowerDbm::new(-60.0).unwrap()).is_ok());
    }
}
