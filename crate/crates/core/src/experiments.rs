//! The four experiments behind the `uwbcal` subcommands.
//!
//! Each command computes everything first and only then writes its output
//! directory, so a rejected run leaves no partial files. Every CSV starts
//! with provenance comment lines; the data rows of a fixed-seed run are
//! byte-identical across reruns.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::calib::{
    calibrate_power_with, drift_residual, fit_power_remap, CalibrationOptions, OutlierGate, PowerCalibration,
    PowerCorrectionCurve, PowerRemap, StepStats,
};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::exchange::{group_by_gain, run_burst, run_sweep, run_twr, DistanceProfile, GainSchedule, GainStep, Scenario};
use crate::logfile::{
    burst_to_log, create_csv, exchange_to_log, read_curve, read_log, write_curve, write_log, write_ranges,
    write_remap, Provenance,
};
use crate::ranging::{estimate_z_pooled, toa_basic, toa_corrected, RangeEstimate, ZOffset};
use crate::ticks::{Meters, PowerDbm, METERS_PER_TICK, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A validated configuration with overrides applied.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
}

impl Prepared {
    pub fn new(kind: ExperimentKind, options: &RunOptions) -> Result<Self> {
        let mut config = match &options.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        config.check_kind(kind)?;
        if let Some(seed) = options.seed {
            config.scenario.seed = seed;
        }
        config.validate()?;
        let out_dir = options
            .out
            .clone()
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
        Ok(Self { kind, config, out_dir })
    }

    /// Directly from a config value, for library use.
    pub fn from_config(kind: ExperimentKind, config: ExperimentConfig, out_dir: impl Into<PathBuf>) -> Result<Self> {
        config.check_kind(kind)?;
        config.validate()?;
        Ok(Self {
            kind,
            config,
            out_dir: out_dir.into(),
        })
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            command: self.kind.name().to_string(),
            config_sha256: self.config.hash(),
            seed: self.config.scenario.seed,
            radio: self.config.scenario.radio.clone(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn create_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        Ok(())
    }
}

/// Runs the command for `prepared.kind`.
pub fn run(prepared: &Prepared) -> Result<String> {
    Ok(match prepared.kind {
        ExperimentKind::DriftDemo => cmd_drift_demo(prepared)?.to_string(),
        ExperimentKind::PowerCalib => cmd_power_calib(prepared)?.to_string(),
        ExperimentKind::TwrRun => cmd_twr_run(prepared)?.to_string(),
        ExperimentKind::Replay => cmd_replay(prepared)?.to_string(),
    })
}

fn write_summary(path: &Path, provenance: &Provenance, rows: &[(&str, String)]) -> Result<()> {
    let mut w = create_csv(path, provenance, &[])?;
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn write_replay_config(prepared: &Prepared, log: &str, curves: Vec<PathBuf>, z_s: f64) -> Result<()> {
    let mut cfg = prepared.config.clone();
    cfg.kind = Some(ExperimentKind::Replay);
    cfg.out_dir = None;
    cfg.replay.log = Some(PathBuf::from(log));
    cfg.replay.curves = curves;
    cfg.replay.z_s = z_s;
    cfg.replay.linear_threshold_dbm = Some(prepared.config.power_calib.linear_threshold_dbm);
    let text = toml::to_string(&cfg).map_err(|e| Error::Config(e.to_string()))?;
    let mut f = std::fs::File::create(prepared.path("replay.toml"))?;
    writeln!(f, "# replays this run's log; paths are relative to this file")?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftDemoReport {
    pub bursts: usize,
    pub mean_c12_m: f64,
    pub mean_residual_m: f64,
    pub std_residual_m: f64,
}

impl std::fmt::Display for DriftDemoReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} bursts: mean C12 {:.6e} m, mean corrected {:.3e} m (std {:.3e} m)",
            self.bursts, self.mean_c12_m, self.mean_residual_m, self.std_residual_m
        )
    }
}

/// Scenario used by the drift demonstration: every burst at the reference
/// gain.
pub fn drift_demo_scenario(config: &ExperimentConfig) -> Scenario {
    Scenario {
        repetitions: config.drift_demo.bursts,
        gains: GainSchedule::constant(config.scenario.gains.reference_gain_db),
        ..config.scenario.clone()
    }
}

/// Raw and corrected P1-P2 clock difference of constant-power bursts.
pub fn cmd_drift_demo(prepared: &Prepared) -> Result<DriftDemoReport> {
    let scenario = drift_demo_scenario(&prepared.config);
    scenario.validate()?;
    let mut rows = Vec::with_capacity(scenario.repetitions);
    for i in 0..scenario.repetitions as u64 {
        let b = run_burst(&scenario, i)?;
        let obs = b.drift_observables()?;
        rows.push((i, scenario.record_start(i).secs(), obs.c12().ticks(), drift_residual(&obs)));
    }
    let c12: Vec<f64> = rows.iter().map(|r| r.2 as f64 * METERS_PER_TICK).collect();
    let residual: Vec<f64> = rows.iter().map(|r| r.3 * METERS_PER_TICK).collect();
    let (mean_c12_m, _) = mean_std(&c12);
    let (mean_residual_m, std_residual_m) = mean_std(&residual);

    prepared.create_out_dir()?;
    let prov = prepared.provenance();
    let mut w = create_csv(&prepared.path("drift.csv"), &prov, &[])?;
    w.write_record([
        "burst_id",
        "time_s",
        "c12_ticks",
        "c12_m",
        "residual_ticks",
        "residual_m",
        "running_mean_c12_m",
        "running_mean_residual_m",
    ])?;
    let (mut sum_c12, mut sum_res) = (0.0, 0.0);
    for (k, &(id, t, c, r)) in rows.iter().enumerate() {
        sum_c12 += c12[k];
        sum_res += residual[k];
        let n = (k + 1) as f64;
        w.write_record([
            id.to_string(),
            t.to_string(),
            c.to_string(),
            c12[k].to_string(),
            r.to_string(),
            residual[k].to_string(),
            (sum_c12 / n).to_string(),
            (sum_res / n).to_string(),
        ])?;
    }
    w.flush()?;
    let report = DriftDemoReport {
        bursts: rows.len(),
        mean_c12_m,
        mean_residual_m,
        std_residual_m,
    };
    write_summary(
        &prepared.path("summary.csv"),
        &prov,
        &[
            ("bursts", report.bursts.to_string()),
            ("mean_c12_m", mean_c12_m.to_string()),
            ("mean_residual_m", mean_residual_m.to_string()),
            ("std_residual_m", std_residual_m.to_string()),
            (
                "std_error_residual_m",
                (std_residual_m / (report.bursts as f64).sqrt()).to_string(),
            ),
        ],
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCalibReport {
    pub calibration: PowerCalibration,
    pub remap: Option<PowerRemap>,
    /// Why no remap was fitted.
    pub remap_note: Option<String>,
    pub bursts: usize,
}

impl std::fmt::Display for PowerCalibReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = &self.calibration.curve;
        write!(
            f,
            "{} bursts, {} steps: curve for station {} with {} knots, reference {:.2} dBm",
            self.bursts,
            self.calibration.steps.len(),
            c.station_id(),
            c.knots().len(),
            c.reference_power_dbm()
        )?;
        match (&self.remap, &self.remap_note) {
            (Some(r), _) => write!(f, "; remap slope {:.4}", r.slope),
            (None, Some(note)) => write!(f, "; no remap: {note}"),
            _ => Ok(()),
        }
    }
}

fn calibration_options(config: &ExperimentConfig) -> CalibrationOptions {
    CalibrationOptions {
        outlier_gate: match config.power_calib.outlier_mad_k {
            Some(k) => OutlierGate::Mad { k },
            None => OutlierGate::Off,
        },
    }
}

/// Uniform spacing of the sweep's P2 gains, if any.
fn ladder_step(sweep: &[GainStep]) -> Option<f64> {
    let mut gains: Vec<f64> = sweep.iter().map(|s| s.tx_gain_p2_db).collect();
    gains.sort_by(f64::total_cmp);
    let step = gains.get(1)? - gains[0];
    let uniform = gains
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * (1.0 + step.abs()));
    (step > 0.0 && uniform).then_some(step)
}

fn calibrate_and_remap(
    sweep: &[GainStep],
    config: &ExperimentConfig,
    threshold_dbm: f64,
) -> Result<(PowerCalibration, Option<PowerRemap>, Option<String>)> {
    let calibration = calibrate_power_with(sweep, &calibration_options(config))?;
    let threshold = PowerDbm::new(threshold_dbm)?;
    let (remap, note) = match ladder_step(sweep) {
        None => (None, Some("P2 gains are not a uniform ladder".to_string())),
        Some(step) => match fit_power_remap(sweep, step, threshold) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    Ok((calibration, remap, note))
}

fn write_steps(path: &Path, prov: &Provenance, steps: &[StepStats]) -> Result<()> {
    let mut w = create_csv(path, prov, &[])?;
    w.write_record([
        "tx_gain_p2_db",
        "n",
        "mean_residual_ticks",
        "std_error_ticks",
        "mean_power_p1_dbm",
        "mean_power_p2_dbm",
        "mean_power_p3_dbm",
    ])?;
    for s in steps {
        w.write_record([
            s.tx_gain_p2_db.to_string(),
            s.n.to_string(),
            s.mean_residual_ticks.to_string(),
            s.std_error_ticks.to_string(),
            s.mean_power_p1_dbm.to_string(),
            s.mean_power_p2_dbm.to_string(),
            s.mean_power_p3_dbm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn curve_file(station: u16) -> String {
    format!("curve_station{station}.csv")
}

fn write_calibration_outputs(
    prepared: &Prepared,
    prov: &Provenance,
    calibration: &PowerCalibration,
    remap: Option<&PowerRemap>,
) -> Result<()> {
    let station = calibration.curve.station_id();
    let steps_name = if prepared.kind == ExperimentKind::Replay {
        format!("steps_station{station}.csv")
    } else {
        "steps.csv".to_string()
    };
    write_steps(&prepared.path(&steps_name), prov, &calibration.steps)?;
    write_curve(&prepared.path(&curve_file(station)), prov, &calibration.curve)?;
    if let Some(r) = remap {
        write_remap(&prepared.path(&format!("remap_station{station}.csv")), prov, r)?;
    }
    Ok(())
}

/// Gain sweep, correction curve and power remap for the responder.
pub fn cmd_power_calib(prepared: &Prepared) -> Result<PowerCalibReport> {
    let cfg = &prepared.config;
    let sweep = run_sweep(&cfg.scenario)?;
    let (calibration, remap, remap_note) = calibrate_and_remap(&sweep, cfg, cfg.power_calib.linear_threshold_dbm)?;

    prepared.create_out_dir()?;
    let prov = prepared.provenance();
    write_calibration_outputs(prepared, &prov, &calibration, remap.as_ref())?;
    if cfg.power_calib.dump_records {
        let rows = sweep.iter().flat_map(|s| s.records.iter().flat_map(burst_to_log));
        write_log(&prepared.path("records.csv"), &prov, rows)?;
        write_replay_config(prepared, "records.csv", Vec::new(), 0.0)?;
    }
    let report = PowerCalibReport {
        bursts: sweep.iter().map(|s| s.records.len()).sum(),
        calibration,
        remap,
        remap_note,
    };
    let mut summary = vec![
        ("bursts", report.bursts.to_string()),
        ("steps", report.calibration.steps.len().to_string()),
        ("station_id", report.calibration.curve.station_id().to_string()),
        ("knots", report.calibration.curve.knots().len().to_string()),
        ("reference_power_dbm", report.calibration.curve.reference_power_dbm().to_string()),
    ];
    match &report.remap {
        Some(r) => {
            summary.push(("remap_slope", r.slope.to_string()));
            summary.push(("remap_fit_residual_db", r.fit_residual_db.to_string()));
        }
        None => summary.push(("remap_skipped", report.remap_note.clone().unwrap_or_default())),
    }
    write_summary(&prepared.path("summary.csv"), &prov, &summary)?;
    Ok(report)
}

/// Per-distance statistics of a ranging run.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub distance_m: f64,
    pub n: usize,
    pub mean_error_m: f64,
    pub std_m: f64,
    /// Error of the basic estimate without power, drift or offset correction.
    pub baseline_mean_error_m: f64,
    pub baseline_std_m: f64,
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwrReport {
    pub curve_tag: PowerCorrectionCurve,
    pub curve_ref: PowerCorrectionCurve,
    pub z: ZOffset,
    pub points: Vec<PointStats>,
    /// Corrected estimates including Z, in exchange order.
    pub ranges: Vec<RangeEstimate>,
}

impl std::fmt::Display for TwrReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Z = {:.6e} s ({:.4} m)", self.z.value_s, self.z.value_s * SPEED_OF_LIGHT)?;
        writeln!(f, "distance_m  mean_err_m  std_m   baseline_err_m")?;
        for p in &self.points {
            writeln!(
                f,
                "{:10.4}  {:+10.5}  {:.5} {:+10.4}",
                p.distance_m, p.mean_error_m, p.std_m, p.baseline_mean_error_m
            )?;
        }
        Ok(())
    }
}

/// The ranging scenario of a twr-run config, with its jitter applied.
pub fn twr_scenario(config: &ExperimentConfig) -> Scenario {
    let mut s = config.scenario.clone();
    s.initiator.clock.jitter_sigma_s = config.twr.jitter_s;
    s.responder.clock.jitter_sigma_s = config.twr.jitter_s;
    s
}

/// Calibrates both stations of a ranging scenario at the configured
/// calibration distance. Returns `(tag curve, reference curve)`.
pub fn calibrate_pair(config: &ExperimentConfig) -> Result<(PowerCorrectionCurve, PowerCorrectionCurve)> {
    let t = &config.twr;
    let base = twr_scenario(config);
    let sweep_scenario = Scenario {
        repetitions: t.calibration_repetitions,
        distance: DistanceProfile::Constant {
            meters: t.calibration_distance_m,
        },
        gains: GainSchedule::ladder(
            base.gains.reference_gain_db,
            t.calibration_start_db,
            t.calibration_step_db,
            t.calibration_steps,
        ),
        ..base
    };
    let options = calibration_options(config);
    let tag = calibrate_power_with(&run_sweep(&sweep_scenario)?, &options)?.curve;
    if t.shared_curve {
        return Ok((tag.clone(), tag));
    }
    // the reference station receives the bursts; its own stream keeps the
    // two sweeps independent
    let mut swapped = sweep_scenario.swapped();
    swapped.seed = swapped.seed.wrapping_add(1);
    let reference = calibrate_power_with(&run_sweep(&swapped)?, &options)?.curve;
    Ok((tag, reference))
}

/// Calibrated two-way ranging over a set of distances.
pub fn cmd_twr_run(prepared: &Prepared) -> Result<TwrReport> {
    let cfg = &prepared.config;
    let (curve_tag, curve_ref) = calibrate_pair(cfg)?;
    let base = twr_scenario(cfg);
    let n = cfg.twr.exchanges_per_point;
    let mut exchanges = Vec::with_capacity(n * cfg.twr.distances_m.len());
    let mut corrected: Vec<Vec<RangeEstimate>> = Vec::new();
    let mut basic: Vec<Vec<RangeEstimate>> = Vec::new();
    for (p, &d) in cfg.twr.distances_m.iter().enumerate() {
        let scenario = Scenario {
            distance: DistanceProfile::Constant { meters: d },
            ..base.clone()
        };
        let (mut c, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let x = run_twr(&scenario, (p * n + i) as u64)?;
            c.push(toa_corrected(&x, &curve_tag, &curve_ref, &ZOffset::zero())?);
            b.push(toa_basic(&x, 0.0, 0.0));
            exchanges.push(x);
        }
        corrected.push(c);
        basic.push(b);
    }
    let groups: Vec<(Meters, &[RangeEstimate])> = cfg
        .twr
        .distances_m
        .iter()
        .zip(&corrected)
        .map(|(&d, c)| Ok((Meters::new(d)?, c.as_slice())))
        .collect::<Result<_>>()?;
    let z = estimate_z_pooled(&groups)?;
    let ranges: Vec<RangeEstimate> = corrected.iter().flatten().map(|e| e.with_z(&z)).collect();

    let points: Vec<PointStats> = cfg
        .twr
        .distances_m
        .iter()
        .enumerate()
        .map(|(p, &d)| {
            let own = &ranges[p * n..(p + 1) * n];
            let err: Vec<f64> = own.iter().map(|e| e.range_m - d).collect();
            let base_err: Vec<f64> = basic[p].iter().map(|e| e.range_m - d).collect();
            let (mean_error_m, std_m) = mean_std(&err);
            let (baseline_mean_error_m, baseline_std_m) = mean_std(&base_err);
            PointStats {
                distance_m: d,
                n,
                mean_error_m,
                std_m,
                baseline_mean_error_m,
                baseline_std_m,
                clamped: own.iter().filter(|e| e.clamped).count(),
            }
        })
        .collect();

    prepared.create_out_dir()?;
    let prov = prepared.provenance();
    let mut curves = vec![curve_file(curve_tag.station_id())];
    write_curve(&prepared.path(&curves[0]), &prov, &curve_tag)?;
    if !cfg.twr.shared_curve {
        curves.push(curve_file(curve_ref.station_id()));
        write_curve(&prepared.path(&curves[1]), &prov, &curve_ref)?;
    }
    write_ranges(&prepared.path("ranges.csv"), &prov, &ranges)?;
    let mut w = create_csv(&prepared.path("points.csv"), &prov, &[])?;
    w.write_record([
        "distance_m",
        "n",
        "mean_error_m",
        "std_m",
        "baseline_mean_error_m",
        "baseline_std_m",
        "clamped",
    ])?;
    for p in &points {
        w.write_record([
            p.distance_m.to_string(),
            p.n.to_string(),
            p.mean_error_m.to_string(),
            p.std_m.to_string(),
            p.baseline_mean_error_m.to_string(),
            p.baseline_std_m.to_string(),
            p.clamped.to_string(),
        ])?;
    }
    w.flush()?;
    if cfg.twr.dump_exchanges {
        let gain = base.gains.reference_gain_db;
        write_log(
            &prepared.path("exchanges.csv"),
            &prov,
            exchanges.iter().flat_map(|x| exchange_to_log(x, gain)),
        )?;
        write_replay_config(prepared, "exchanges.csv", curves.iter().map(PathBuf::from).collect(), z.value_s)?;
    }
    write_summary(
        &prepared.path("summary.csv"),
        &prov,
        &[
            ("exchanges", exchanges.len().to_string()),
            ("z_s", z.value_s.to_string()),
            ("z_m", (z.value_s * SPEED_OF_LIGHT).to_string()),
            ("jitter_s", cfg.twr.jitter_s.to_string()),
        ],
    )?;
    Ok(TwrReport {
        curve_tag,
        curve_ref,
        z,
        points,
        ranges,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub bursts: usize,
    pub exchanges: usize,
    pub skipped: Vec<u64>,
    pub calibrations: Vec<PowerCalibration>,
    pub ranges: Vec<RangeEstimate>,
}

impl std::fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} bursts, {} exchanges, {} incomplete groups skipped; {} curves, {} ranges",
            self.bursts,
            self.exchanges,
            self.skipped.len(),
            self.calibrations.len(),
            self.ranges.len()
        )
    }
}

/// Runs a recorded log through calibration (bursts) and ranging (exchanges).
pub fn cmd_replay(prepared: &Prepared) -> Result<ReplayReport> {
    let cfg = &prepared.config;
    let log = cfg
        .replay
        .log
        .as_ref()
        .ok_or_else(|| Error::Config("replay needs `replay.log`".into()))?;
    let parsed = read_log(log)?;
    if parsed.bursts.is_empty() && parsed.exchanges.is_empty() {
        return Err(Error::Empty(format!(
            "{}: no complete bursts or exchanges ({} incomplete)",
            log.display(),
            parsed.skipped.len()
        )));
    }
    let threshold = cfg
        .replay
        .linear_threshold_dbm
        .unwrap_or(cfg.power_calib.linear_threshold_dbm);

    let mut pairs: BTreeMap<(u16, u16), Vec<_>> = BTreeMap::new();
    for b in &parsed.bursts {
        pairs.entry((b.tx_station, b.rx_station)).or_default().push(b.clone());
    }
    let mut calibrated = Vec::new();
    for records in pairs.into_values() {
        let sweep = group_by_gain(records);
        calibrated.push(calibrate_and_remap(&sweep, cfg, threshold)?);
    }

    let mut skipped = parsed.skipped.clone();
    let mut ranges = Vec::new();
    if !parsed.exchanges.is_empty() {
        let curves = cfg
            .replay
            .curves
            .iter()
            .map(|p| read_curve(p))
            .collect::<Result<Vec<_>>>()?;
        let z = ZOffset::configured(cfg.replay.z_s)?;
        let pick = |station: u16| -> Result<PowerCorrectionCurve> {
            if let Some(c) = curves.iter().find(|c| c.station_id() == station) {
                return Ok(c.clone());
            }
            match curves.as_slice() {
                [] => Ok(PowerCorrectionCurve::flat(station, 0.0)),
                [only] => Ok(only.clone()),
                _ => Err(Error::Config(format!("no correction curve for station {station}"))),
            }
        };
        for x in &parsed.exchanges {
            if x.third.is_none() {
                skipped.push(x.id);
                continue;
            }
            ranges.push(toa_corrected(x, &pick(x.tag_station)?, &pick(x.reference_station)?, &z)?);
        }
    }

    prepared.create_out_dir()?;
    let prov = prepared.provenance();
    for (calibration, remap, _) in &calibrated {
        write_calibration_outputs(prepared, &prov, calibration, remap.as_ref())?;
    }
    if !ranges.is_empty() {
        write_ranges(&prepared.path("ranges.csv"), &prov, &ranges)?;
    }
    write_summary(
        &prepared.path("summary.csv"),
        &prov,
        &[
            ("bursts", parsed.bursts.len().to_string()),
            ("exchanges", parsed.exchanges.len().to_string()),
            ("skipped", skipped.len().to_string()),
            ("ranges", ranges.len().to_string()),
        ],
    )?;
    Ok(ReplayReport {
        bursts: parsed.bursts.len(),
        exchanges: parsed.exchanges.len(),
        skipped,
        calibrations: calibrated.into_iter().map(|c| c.0).collect(),
        ranges,
    })
}
