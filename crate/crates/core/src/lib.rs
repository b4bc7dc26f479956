//! Simulation and correction toolkit for DW1000-style UWB two-way ranging.
//!
//! The crate covers the whole chain from physics to range estimates:
//!
//! * [`ticks`]: 40-bit timestamp arithmetic and unit types.
//! * [`models`]: parametric clocks, power-dependent timestamp bias, RX power
//!   measurement distortion and a log-distance channel.
//! * [`exchange`]: a deterministic event engine producing the observables of
//!   three-message bursts and two-way ranging exchanges.
//! * [`calib`]: drift correction by linear interpolation across a
//!   three-message burst, and signal-power self-calibration from a TX gain
//!   sweep.
//! * [`ranging`]: time-of-flight estimation with drift and power correction.
//! * [`config`], [`logfile`] and [`experiments`]: the experiment runner and
//!   its file formats, used by the `uwbcal` binary.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod calib;
pub mod config;
pub mod exchange;
pub mod experiments;
pub mod logfile;
pub mod models;
mod pwl;
pub mod ranging;
pub mod ticks;

pub use calib::{
    calibrate_power, drift_ratio, drift_residual, fit_power_remap, lookup_correction,
    DriftObservables, PowerCorrectionCurve, PowerRemap,
};
pub use exchange::{run_burst, run_sweep, run_twr, BurstRecord, Scenario, Station, TwrExchange};
pub use models::{ChannelModel, ClockModel, PowerBiasModel, PowerMeasurementModel};
pub use ranging::{estimate_z, toa_basic, toa_corrected, RangeEstimate, ZOffset};
pub use ticks::{wrap_diff, Meters, PowerDbm, TickSpan, TickTime};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tick span out of range: {0} ticks")]
    SpanOverflow(f64),

    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    #[error("malformed burst: {0}")]
    MalformedBurst(String),

    #[error("calibration rejected: {0}")]
    Calibration(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: row {row}: {detail}")]
    Row {
        path: PathBuf,
        row: u64,
        detail: String,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
