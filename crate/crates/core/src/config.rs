//! Experiment configuration, read from TOML.
//!
//! Every section is optional and falls back to its defaults; unknown keys are
//! rejected with their location.
//!
//! ```toml
//! kind = "power-calib"
//!
//! [scenario]
//! seed = 3
//! repetitions = 500
//!
//! [scenario.responder.clock]
//! rate_error = 5e-6
//!
//! [power_calib]
//! linear_threshold_dbm = -85.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exchange::{Scenario, PAPER_SCALE_JITTER_S};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DriftDemo,
    PowerCalib,
    TwrRun,
    Replay,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DriftDemo => "drift-demo",
            ExperimentKind::PowerCalib => "power-calib",
            ExperimentKind::TwrRun => "twr-run",
            ExperimentKind::Replay => "replay",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftDemoConfig {
    /// Bursts at constant power.
    pub bursts: usize,
}

impl Default for DriftDemoConfig {
    fn default() -> Self {
        Self { bursts: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerCalibConfig {
    /// Reported powers below this are trusted when fitting the remap.
    pub linear_threshold_dbm: f64,
    /// Drop residuals beyond this many scaled MADs from the step median.
    pub outlier_mad_k: Option<f64>,
    /// Also dump every burst to `records.csv`.
    pub dump_records: bool,
}

impl Default for PowerCalibConfig {
    fn default() -> Self {
        Self {
            linear_threshold_dbm: -85.0,
            outlier_mad_k: None,
            dump_records: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwrConfig {
    pub distances_m: Vec<f64>,
    pub exchanges_per_point: usize,
    /// Receive jitter applied to both stations for the whole run.
    pub jitter_s: f64,
    /// Distance of the calibration sweeps that build both stations' curves.
    pub calibration_distance_m: f64,
    pub calibration_repetitions: usize,
    pub calibration_start_db: f64,
    pub calibration_step_db: f64,
    pub calibration_steps: usize,
    /// Use the responder's curve for both stations.
    pub shared_curve: bool,
    /// Also dump every exchange to `exchanges.csv`.
    pub dump_exchanges: bool,
}

impl Default for TwrConfig {
    fn default() -> Self {
        Self {
            distances_m: default_distances(),
            exchanges_per_point: 2000,
            jitter_s: PAPER_SCALE_JITTER_S,
            calibration_distance_m: 0.5,
            calibration_repetitions: 2000,
            calibration_start_db: 0.0,
            calibration_step_db: -0.5,
            calibration_steps: 101,
            shared_curve: false,
            dump_exchanges: true,
        }
    }
}

/// Eleven distances from 3.515 m down to 0.562 m in equal steps.
pub fn default_distances() -> Vec<f64> {
    let (far, near) = (3.515, 0.562);
    (0..11).map(|k| far - k as f64 * (far - near) / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplayConfig {
    /// Log to replay; relative paths resolve against the config file.
    pub log: Option<PathBuf>,
    /// Correction curves for ranging; without them a burst log is
    /// calibrated instead.
    pub curves: Vec<PathBuf>,
    /// Ranging offset in seconds.
    pub z_s: f64,
    pub linear_threshold_dbm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When set, must match the subcommand.
    pub kind: Option<ExperimentKind>,
    pub out_dir: Option<PathBuf>,
    pub scenario: Scenario,
    pub drift_demo: DriftDemoConfig,
    pub power_calib: PowerCalibConfig,
    pub twr: TwrConfig,
    pub replay: ReplayConfig,
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(log) = cfg.replay.log.as_mut() {
            resolve(log);
        }
        cfg.replay.curves.iter_mut().for_each(resolve);
        Ok(cfg)
    }

    /// Rejects a config declared for a different experiment.
    pub fn check_kind(&self, kind: ExperimentKind) -> Result<()> {
        match self.kind {
            Some(k) if k != kind => Err(Error::Config(format!(
                "config is for `{k}` but `{kind}` was requested"
            ))),
            _ => Ok(()),
        }
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.drift_demo.bursts == 0 {
            return Err(Error::Config("drift_demo.bursts must be at least 1".into()));
        }
        if let Some(k) = self.power_calib.outlier_mad_k {
            if !(k > 0.0) {
                return Err(Error::Config("power_calib.outlier_mad_k must be positive".into()));
            }
        }
        let t = &self.twr;
        if t.distances_m.is_empty() || t.distances_m.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config("twr.distances_m must be non-empty and positive".into()));
        }
        if t.exchanges_per_point == 0 || t.calibration_repetitions == 0 {
            return Err(Error::Config("twr counts must be at least 1".into()));
        }
        if t.calibration_steps < 3 || !(t.calibration_step_db != 0.0 && t.calibration_step_db.is_finite()) {
            return Err(Error::Config(
                "twr calibration needs at least 3 steps and a non-zero step".into(),
            ));
        }
        if !(t.jitter_s >= 0.0 && t.calibration_distance_m > 0.0) {
            return Err(Error::Config(
                "twr.jitter_s must be non-negative and calibration_distance_m positive".into(),
            ));
        }
        if !self.replay.z_s.is_finite() {
            return Err(Error::Config("replay.z_s must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Distortion;

    #[test]
    fn empty_config_is_default() {
        let cfg: ExperimentConfig = "".parse().unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn nested_sections() {
        let cfg: ExperimentConfig = r#"
            kind = "twr-run"
            [scenario]
            seed = 9
            [scenario.responder.clock]
            rate_error = -3e-6
            [scenario.responder.measurement.distortion]
            kind = "linear"
            knee_dbm = -85.0
            slope = 0.5
            [scenario.distance]
            kind = "constant-velocity"
            initial_m = 2.0
            velocity_mps = 1.0
            [twr]
            distances_m = [1.0, 2.0]
        "#
        .parse()
        .unwrap();
        assert_eq!(cfg.kind, Some(ExperimentKind::TwrRun));
        assert_eq!(cfg.scenario.seed, 9);
        assert_eq!(cfg.scenario.responder.clock.rate_error, -3e-6);
        assert_eq!(
            cfg.scenario.responder.measurement.distortion,
            Distortion::Linear {
                knee_dbm: -85.0,
                slope: 0.5
            }
        );
        assert_eq!(cfg.twr.distances_m, vec![1.0, 2.0]);
        assert!(cfg.check_kind(ExperimentKind::TwrRun).is_ok());
        assert!(cfg.check_kind(ExperimentKind::Replay).is_err());
    }

    #[test]
    fn unknown_keys_report_location() {
        let err = "[scenario.timing]\nperiod_s = 0.01\nburst_gap_s = 1e-3\n"
            .parse::<ExperimentConfig>()
            .unwrap_err()
            .to_string();
        assert!(err.contains("burst_gap_s"), "{err}");
        assert!(err.contains("line 3"), "{err}");
        assert!("[scenario.distance]\nkind = \"constant\"\nmeters = 1.0\nspeed = 2.0\n"
            .parse::<ExperimentConfig>()
            .is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.scenario.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
        let text = toml::to_string(&a).unwrap();
        assert_eq!(text.parse::<ExperimentConfig>().unwrap(), a);
    }

    #[test]
    fn default_distances_span() {
        let d = default_distances();
        assert_eq!(d.len(), 11);
        assert_eq!(d[0], 3.515);
        assert!((d[10] - 0.562).abs() < 1e-12);
    }
}
