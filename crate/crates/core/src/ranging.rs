//! Time-of-flight from a two-way ranging exchange.
//!
//! With `ΔR = t2r − t1r` (reference round trip) and `ΔT = t2t − t1t` (tag
//! turnaround), the basic estimate is `(ΔR − ΔT − E2 − E1)/2`, where `E1`
//! and `E2` are the receive timestamp biases at the tag and the reference.
//! The corrected estimate also removes the clock drift accumulated over the
//! tag turnaround, measured from the tag's third message:
//!
//! ```text
//! toa = ½·(ΔR − ΔT − ρ·(ΔT + E1) − E2 − E1) + Z
//! ρ   = ((t3r − t2r) − (t3t − t2t)) / (t3t − t2t)
//! ```
//!
//! `ΔT + E1` is the true tag turnaround: the tag's receive timestamp is late
//! by `E1`, so its measured turnaround is short by the same amount. `Z`
//! lumps hardware delays and the unobservable absolute bias level.

use crate::calib::PowerCorrectionCurve;
use crate::exchange::TwrExchange;
use crate::ticks::{wrap_diff, Meters, SPEED_OF_LIGHT, TICK_PERIOD_S};
use crate::{Error, Result};

/// Signed contributions to a time-of-flight estimate, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Components {
    /// `½·(ΔR − ΔT)`.
    pub raw_half_s: f64,
    /// `−½·ρ·(ΔT + E1)`.
    pub drift_s: f64,
    /// `−½·E1`.
    pub e1_s: f64,
    /// `−½·E2`.
    pub e2_s: f64,
    pub z_s: f64,
    /// Part of `drift_s` caused by a bias difference between messages 2 and
    /// 3 at the reference. Diagnostic only; not included in the sum.
    pub e3_mismatch_s: f64,
}

impl Components {
    /// Sum in a fixed order; `RangeEstimate::toa_s` is exactly this value.
    pub fn total(&self) -> f64 {
        self.raw_half_s + self.drift_s + self.e1_s + self.e2_s + self.z_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeEstimate {
    pub exchange_id: u64,
    pub toa_s: f64,
    /// `c·toa`; signed, so calibration faults stay visible.
    pub range_m: f64,
    pub components: Components,
    /// A power lookup fell outside its curve's calibrated range.
    pub clamped: bool,
}

impl RangeEstimate {
    fn from_components(exchange_id: u64, components: Components, clamped: bool) -> Self {
        let toa_s = components.total();
        Self {
            exchange_id,
            toa_s,
            range_m: toa_s * SPEED_OF_LIGHT,
            components,
            clamped,
        }
    }

    /// Time of flight without the offset.
    pub fn toa_without_z(&self) -> f64 {
        let c = Components {
            z_s: 0.0,
            ..self.components
        };
        c.total()
    }

    /// Same estimate with a different offset.
    pub fn with_z(&self, z: &ZOffset) -> Self {
        let components = Components {
            z_s: z.value_s,
            ..self.components
        };
        Self::from_components(self.exchange_id, components, self.clamped)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZProvenance {
    Configured,
    /// Estimated from `samples` exchanges at known distances.
    Estimated { samples: usize },
}

/// Lumped hardware-delay and bias-reference offset for a station pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZOffset {
    pub value_s: f64,
    pub provenance: ZProvenance,
}

impl ZOffset {
    pub fn configured(value_s: f64) -> Result<Self> {
        if !value_s.is_finite() {
            return Err(Error::invalid("offset", "Z must be finite"));
        }
        Ok(Self {
            value_s,
            provenance: ZProvenance::Configured,
        })
    }

    pub fn zero() -> Self {
        Self {
            value_s: 0.0,
            provenance: ZProvenance::Configured,
        }
    }
}

/// Basic estimate with caller-supplied biases `e1`, `e2` in ticks; no drift
/// correction and no offset.
pub fn toa_basic(x: &TwrExchange, e1_ticks: f64, e2_ticks: f64) -> RangeEstimate {
    let round_trip = wrap_diff(x.t1r_tx, x.t2r_rx).ticks();
    let turnaround = wrap_diff(x.t1t_rx, x.t2t_tx).ticks();
    let components = Components {
        raw_half_s: 0.5 * (round_trip - turnaround) as f64 * TICK_PERIOD_S,
        e1_s: -0.5 * e1_ticks * TICK_PERIOD_S,
        e2_s: -0.5 * e2_ticks * TICK_PERIOD_S,
        ..Components::default()
    };
    RangeEstimate::from_components(x.id, components, false)
}

/// Relative frequency of the reference clock against the tag clock, from
/// the tag's two transmissions.
pub fn exchange_drift_ratio(x: &TwrExchange) -> Result<f64> {
    let third = x
        .third
        .as_ref()
        .ok_or_else(|| Error::MalformedBurst(format!("exchange {} has no third message", x.id)))?;
    let tag_span = wrap_diff(x.t2t_tx, third.t3t_tx).ticks();
    if tag_span == 0 {
        return Err(Error::MalformedBurst(format!("exchange {} has a zero tag span", x.id)));
    }
    let ref_span = wrap_diff(x.t2r_rx, third.t3r_rx).ticks();
    Ok((ref_span - tag_span) as f64 / tag_span as f64)
}

/// Drift- and power-corrected estimate. Pass the same curve twice to use one
/// shared curve for both stations.
pub fn toa_corrected(
    x: &TwrExchange,
    curve_tag: &PowerCorrectionCurve,
    curve_ref: &PowerCorrectionCurve,
    z: &ZOffset,
) -> Result<RangeEstimate> {
    let ratio = exchange_drift_ratio(x)?;
    let third = x.third.as_ref().expect("checked by drift ratio");
    let tag_span = wrap_diff(x.t2t_tx, third.t3t_tx).ticks() as f64;

    let c1 = curve_tag.lookup(x.measured_power_tag);
    let c2 = curve_ref.lookup(x.measured_power_ref_2);
    let c3 = curve_ref.lookup(third.measured_power_ref_3);
    let (e1, e2, e3) = (-c1.ticks, -c2.ticks, -c3.ticks);

    let round_trip = wrap_diff(x.t1r_tx, x.t2r_rx).ticks();
    let turnaround = wrap_diff(x.t1t_rx, x.t2t_tx).ticks();
    let true_turnaround = turnaround as f64 + e1;
    let components = Components {
        raw_half_s: 0.5 * (round_trip - turnaround) as f64 * TICK_PERIOD_S,
        drift_s: -0.5 * ratio * true_turnaround * TICK_PERIOD_S,
        e1_s: -0.5 * e1 * TICK_PERIOD_S,
        e2_s: -0.5 * e2 * TICK_PERIOD_S,
        z_s: z.value_s,
        e3_mismatch_s: -0.5 * (e3 - e2) / tag_span * true_turnaround * TICK_PERIOD_S,
    };
    Ok(RangeEstimate::from_components(
        x.id,
        components,
        c1.clamped || c2.clamped || c3.clamped,
    ))
}

/// Offset that makes the mean estimate match a known distance.
pub fn estimate_z(known_distance: Meters, estimates: &[RangeEstimate]) -> Result<ZOffset> {
    if estimates.is_empty() {
        return Err(Error::Empty("no range estimates to fit Z".into()));
    }
    let mean = estimates.iter().map(|e| e.toa_without_z()).sum::<f64>() / estimates.len() as f64;
    Ok(ZOffset {
        value_s: known_distance.propagation_seconds() - mean,
        provenance: ZProvenance::Estimated {
            samples: estimates.len(),
        },
    })
}

/// Mean of per-distance offsets over several known distances.
pub fn estimate_z_pooled(groups: &[(Meters, &[RangeEstimate])]) -> Result<ZOffset> {
    if groups.is_empty() {
        return Err(Error::Empty("no distance groups to fit Z".into()));
    }
    let mut total = 0.0;
    let mut samples = 0;
    for (d, estimates) in groups {
        total += estimate_z(*d, estimates)?.value_s;
        samples += estimates.len();
    }
    Ok(ZOffset {
        value_s: total / groups.len() as f64,
        provenance: ZProvenance::Estimated { samples },
    })
}
