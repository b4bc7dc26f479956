//! Ground-truth physics used by the simulator: station clocks, the
//! power-dependent receive timestamp bias, the distortion of the reported
//! receive power, and a log-distance channel.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::pwl;
use crate::ticks::{Meters, PowerDbm, TickTime, TICK_HZ_F64};
use crate::{Error, Result};

const FEMTOS_PER_SECOND: i128 = 1_000_000_000_000_000;

/// True (simulation) time in femtoseconds.
///
/// Long sweeps run for hours of simulated time; an `f64` second count would
/// lose sub-tick resolution there, so time is kept as an exact integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(i128);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_femtos(fs: i128) -> Self {
        Self(fs)
    }

    pub fn from_secs(s: f64) -> Self {
        Self((s * FEMTOS_PER_SECOND as f64).round() as i128)
    }

    pub fn femtos(self) -> i128 {
        self.0
    }

    pub fn secs(self) -> f64 {
        let whole = self.0.div_euclid(FEMTOS_PER_SECOND);
        let rem = self.0.rem_euclid(FEMTOS_PER_SECOND);
        whole as f64 + rem as f64 / FEMTOS_PER_SECOND as f64
    }

    pub fn add_secs(self, s: f64) -> Self {
        Self(self.0 + (s * FEMTOS_PER_SECOND as f64).round() as i128)
    }

    /// Seconds elapsed since `earlier`.
    pub fn since(self, earlier: SimTime) -> f64 {
        SimTime(self.0 - earlier.0).secs()
    }
}

/// Unwrapped local counter reading split into an integer and a fractional
/// part so sub-tick resolution survives large counter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtTicks {
    whole: i64,
    frac: f64,
}

impl ExtTicks {
    fn new(whole: i64, frac: f64) -> Self {
        let mut t = Self { whole, frac: 0.0 };
        t.add(frac);
        t
    }

    fn add(&mut self, ticks: f64) {
        let w = ticks.floor();
        self.whole += w as i64;
        self.frac += ticks - w;
        if self.frac >= 1.0 {
            self.whole += 1;
            self.frac -= 1.0;
        }
    }

    pub fn plus(mut self, ticks: f64) -> Self {
        self.add(ticks);
        self
    }

    /// Nearest integer tick.
    pub fn round(self) -> i64 {
        self.whole + i64::from(self.frac >= 0.5)
    }

    /// `target - self` in ticks.
    pub fn until(self, target: i64) -> f64 {
        (target - self.whole) as f64 - self.frac
    }

    pub fn as_f64(self) -> f64 {
        self.whole as f64 + self.frac
    }
}

/// Oscillator of one station.
///
/// Local time is `offset + (1 + r)·t + A·τ·(1 − e^(−t/τ))`: an affine clock
/// plus a frequency error that starts at `r + A` and relaxes exponentially
/// to `r` while the crystal warms up. Each receive timestamp additionally
/// carries white Gaussian jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockModel {
    pub initial_offset_s: f64,
    pub rate_error: f64,
    pub warmup_amplitude: f64,
    pub warmup_time_constant_s: f64,
    pub jitter_sigma_s: f64,
}

impl Default for ClockModel {
    fn default() -> Self {
        Self {
            initial_offset_s: 0.0,
            rate_error: 0.0,
            warmup_amplitude: 0.0,
            warmup_time_constant_s: 900.0,
            jitter_sigma_s: 0.0,
        }
    }
}

impl ClockModel {
    pub fn affine(initial_offset_s: f64, rate_error: f64) -> Self {
        Self {
            initial_offset_s,
            rate_error,
            ..Self::default()
        }
    }

    pub fn with_jitter(mut self, sigma_s: f64) -> Self {
        self.jitter_sigma_s = sigma_s;
        self
    }

    pub fn with_warmup(mut self, amplitude: f64, time_constant_s: f64) -> Self {
        self.warmup_amplitude = amplitude;
        self.warmup_time_constant_s = time_constant_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.initial_offset_s,
            self.rate_error,
            self.warmup_amplitude,
            self.warmup_time_constant_s,
            self.jitter_sigma_s,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("clock", "parameters must be finite"));
        }
        if self.initial_offset_s < 0.0 {
            return Err(Error::invalid("clock", "initial offset must be non-negative"));
        }
        if self.rate_error.abs() >= 1e-3 || self.warmup_amplitude.abs() >= 1e-3 {
            return Err(Error::invalid("clock", "fractional frequency errors must stay below 1e-3"));
        }
        if self.warmup_time_constant_s <= 0.0 {
            return Err(Error::invalid("clock", "warm-up time constant must be positive"));
        }
        if self.jitter_sigma_s < 0.0 {
            return Err(Error::invalid("clock", "jitter sigma must be non-negative"));
        }
        Ok(())
    }

    /// Noise-free unwrapped local counter at true time `t`.
    pub fn local_ticks(&self, t: SimTime) -> ExtTicks {
        let scaled = t.femtos() * 638_976;
        let denom: i128 = 10_000_000_000;
        let base_whole = scaled.div_euclid(denom) as i64;
        let base_frac = scaled.rem_euclid(denom) as f64 / denom as f64;
        let secs = t.secs();
        let mut local = ExtTicks::new(base_whole, base_frac);
        local.add(self.initial_offset_s * TICK_HZ_F64);
        local.add(self.rate_error * secs * TICK_HZ_F64);
        if self.warmup_amplitude != 0.0 {
            let tau = self.warmup_time_constant_s;
            local.add(self.warmup_amplitude * tau * -(-secs / tau).exp_m1() * TICK_HZ_F64);
        }
        local
    }

    /// Instantaneous counter rate in ticks per second.
    pub fn rate(&self, t: SimTime) -> f64 {
        let warm = self.warmup_amplitude * (-t.secs() / self.warmup_time_constant_s).exp();
        TICK_HZ_F64 * (1.0 + self.rate_error + warm)
    }

    /// True instant at which the counter reads exactly `target`.
    pub fn instant_of(&self, target: i64, guess: SimTime) -> SimTime {
        let mut t = guess;
        for _ in 0..8 {
            let behind = self.local_ticks(t).until(target);
            if behind.abs() < 1e-4 {
                break;
            }
            t = t.add_secs(behind / self.rate(t));
        }
        t
    }

    pub fn jitter_ticks(&self) -> f64 {
        self.jitter_sigma_s * TICK_HZ_F64
    }
}

/// Timestamp this clock reports for an event at true time `t_true` seconds,
/// including one jitter draw from `rng`.
pub fn local_timestamp<R: Rng + ?Sized>(clock: &ClockModel, t_true: f64, rng: &mut R) -> Result<TickTime> {
    if !(t_true >= 0.0) {
        return Err(Error::invalid("time", format!("{t_true} s must be non-negative")));
    }
    let noise: f64 = rng.sample(StandardNormal);
    let local = clock
        .local_ticks(SimTime::from_secs(t_true))
        .plus(noise * clock.jitter_ticks());
    Ok(TickTime::wrapping(local.round()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBiasModel {
    knots_ticks: Vec<(f64, f64)>,
}

/// Receive timestamp bias as a function of the actual received power.
///
/// Positive bias means a late timestamp. The bias shrinks as power rises and
/// passes through zero at `zero_crossing_dbm`; it is held constant outside
/// the knot range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBiasModel", into = "RawBiasModel")]
pub struct PowerBiasModel {
    knots: Vec<(f64, f64)>,
    zero_crossing_dbm: f64,
}

impl TryFrom<RawBiasModel> for PowerBiasModel {
    type Error = Error;
    fn try_from(raw: RawBiasModel) -> Result<Self> {
        Self::from_ticks(raw.knots_ticks)
    }
}

impl From<PowerBiasModel> for RawBiasModel {
    fn from(m: PowerBiasModel) -> Self {
        RawBiasModel { knots_ticks: m.knots }
    }
}

impl Default for PowerBiasModel {
    fn default() -> Self {
        Self::from_ticks(vec![(-105.0, 60.0), (-80.0, 0.0), (-60.0, -40.0)])
            .expect("default bias curve is valid")
    }
}

impl PowerBiasModel {
    /// Builds a model from `(actual dBm, bias ticks)` knots.
    pub fn from_ticks(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("bias curve", "needs at least one knot"));
        }
        if !pwl::is_strictly_increasing(&knots) {
            return Err(Error::invalid("bias curve", "powers must be finite and strictly increasing"));
        }
        if knots.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(Error::invalid("bias curve", "bias must not increase with power"));
        }
        let zero_crossing_dbm = zero_crossing(&knots)
            .ok_or_else(|| Error::invalid("bias curve", "bias never crosses zero"))?;
        Ok(Self {
            knots,
            zero_crossing_dbm,
        })
    }

    /// No power dependence at all.
    pub fn zero() -> Self {
        Self::from_ticks(vec![(-80.0, 0.0)]).expect("flat curve is valid")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn zero_crossing_dbm(&self) -> f64 {
        self.zero_crossing_dbm
    }

    pub fn bias_ticks(&self, actual: PowerDbm) -> f64 {
        pwl::interpolate(&self.knots, actual.dbm()).0
    }

    pub fn bias_seconds(&self, actual: PowerDbm) -> f64 {
        self.bias_ticks(actual) / TICK_HZ_F64
    }
}

pub fn bias_seconds(model: &PowerBiasModel, actual: PowerDbm) -> f64 {
    model.bias_seconds(actual)
}

fn zero_crossing(knots: &[(f64, f64)]) -> Option<f64> {
    if let Some(k) = knots.iter().find(|k| k.1 == 0.0) {
        return Some(k.0);
    }
    knots.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0 > 0.0 && y1 < 0.0).then(|| x0 + (x1 - x0) * y0 / (y0 - y1))
    })
}

/// How the receiver's power estimate departs from the actual power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Distortion {
    Identity,
    /// `knee + K·ln(1 + (a − knee)/K)` above the knee: unit slope at the
    /// knee, increasingly compressive above it.
    SoftKnee { knee_dbm: f64, scale_db: f64 },
    /// `knee + slope·(a − knee)` above the knee.
    Linear { knee_dbm: f64, slope: f64 },
}

impl Distortion {
    pub fn measured(&self, actual: f64) -> f64 {
        match *self {
            Distortion::Identity => actual,
            Distortion::SoftKnee { knee_dbm, scale_db } if actual > knee_dbm => {
                knee_dbm + scale_db * ((actual - knee_dbm) / scale_db).ln_1p()
            }
            Distortion::Linear { knee_dbm, slope } if actual > knee_dbm => {
                knee_dbm + slope * (actual - knee_dbm)
            }
            _ => actual,
        }
    }

    pub fn actual(&self, measured: f64) -> f64 {
        match *self {
            Distortion::Identity => measured,
            Distortion::SoftKnee { knee_dbm, scale_db } if measured > knee_dbm => {
                knee_dbm + scale_db * ((measured - knee_dbm) / scale_db).exp_m1()
            }
            Distortion::Linear { knee_dbm, slope } if measured > knee_dbm => {
                knee_dbm + (measured - knee_dbm) / slope
            }
            _ => measured,
        }
    }
}

/// Receive power reporting: distortion, per-report Gaussian noise, and the
/// resolution of the reported value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerMeasurementModel {
    pub distortion: Distortion,
    pub noise_sigma_db: f64,
    pub resolution_db: f64,
}

impl Default for PowerMeasurementModel {
    fn default() -> Self {
        Self {
            distortion: Distortion::SoftKnee {
                knee_dbm: -85.0,
                scale_db: 20.0,
            },
            noise_sigma_db: 0.1,
            resolution_db: 0.01,
        }
    }
}

impl PowerMeasurementModel {
    pub fn identity() -> Self {
        Self {
            distortion: Distortion::Identity,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.distortion {
            Distortion::SoftKnee { knee_dbm, scale_db } if !(knee_dbm.is_finite() && scale_db > 0.0) => {
                return Err(Error::invalid("power distortion", "soft knee needs a positive scale"));
            }
            Distortion::Linear { knee_dbm, slope } if !(knee_dbm.is_finite() && slope > 0.0 && slope <= 1.0) => {
                return Err(Error::invalid("power distortion", "linear slope must lie in (0, 1]"));
            }
            _ => {}
        }
        if !(self.noise_sigma_db >= 0.0) || !(self.resolution_db >= 0.0) {
            return Err(Error::invalid("power measurement", "noise and resolution must be non-negative"));
        }
        Ok(())
    }

    /// Noise-free measured power.
    pub fn measure(&self, actual: PowerDbm) -> PowerDbm {
        PowerDbm::new(self.distortion.measured(actual.dbm())).expect("distortion keeps power finite")
    }

    /// Reported power for one reception, drawing noise from `rng`.
    pub fn report<R: Rng + ?Sized>(&self, actual: PowerDbm, rng: &mut R) -> PowerDbm {
        let noise: f64 = rng.sample(StandardNormal);
        let raw = self.distortion.measured(actual.dbm()) + noise * self.noise_sigma_db;
        let reported = if self.resolution_db > 0.0 {
            let per_db = 1.0 / self.resolution_db;
            (raw * per_db).round() / per_db
        } else {
            raw
        };
        PowerDbm::new(reported).expect("reported power is finite")
    }
}

pub fn measure_power(model: &PowerMeasurementModel, actual: PowerDbm) -> PowerDbm {
    model.measure(actual)
}

/// Log-distance path loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelModel {
    pub ref_power_at_1m_dbm: f64,
    pub path_loss_exponent: f64,
    pub base_tx_gain_db: f64,
    pub rx_window_dbm: (f64, f64),
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            ref_power_at_1m_dbm: -60.0,
            path_loss_exponent: 2.0,
            base_tx_gain_db: 0.0,
            rx_window_dbm: (-120.0, -40.0),
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.ref_power_at_1m_dbm.is_finite() && self.base_tx_gain_db.is_finite()) {
            return Err(Error::invalid("channel", "powers must be finite"));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::invalid("channel", "path loss exponent must be positive"));
        }
        if !(self.rx_window_dbm.0 < self.rx_window_dbm.1) {
            return Err(Error::invalid("channel", "receive window must be a non-empty range"));
        }
        Ok(())
    }

    /// Actual received power at `distance` for a transmit gain offset.
    pub fn rx_power(&self, distance: Meters, tx_gain_db: f64) -> Result<PowerDbm> {
        if distance.get() <= 0.0 {
            return Err(Error::invalid("distance", "received power needs a positive distance"));
        }
        let dbm = self.ref_power_at_1m_dbm + self.base_tx_gain_db + tx_gain_db
            - 10.0 * self.path_loss_exponent * distance.get().log10();
        PowerDbm::rx(dbm, self.rx_window_dbm)
    }
}

pub fn rx_power(channel: &ChannelModel, distance: Meters, tx_gain_db: f64) -> Result<PowerDbm> {
    channel.rx_power(distance, tx_gain_db)
}
