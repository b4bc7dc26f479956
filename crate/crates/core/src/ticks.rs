//! Tick-domain time arithmetic and the physical unit types shared by the
//! rest of the crate.
//!
//! The DW1000 event counter runs at 128 × 499.2 MHz = 63.8976 GHz, so one tick
//! is about 15.65 ps, or about 4.69 mm of free-space path. Data sheets and
//! most write-ups round this to "15 ps / 4.496 mm"; all arithmetic here uses
//! the exact hardware rate. The counter is 40 bits wide and wraps roughly
//! every 17.2 s.

use std::fmt;

use crate::{Error, Result};

/// Counter rate in Hz.
pub const TICK_HZ: u64 = 63_897_600_000;

/// Counter rate as a float, for conversions.
pub const TICK_HZ_F64: f64 = TICK_HZ as f64;

/// Seconds per tick.
pub const TICK_PERIOD_S: f64 = 1.0 / TICK_HZ_F64;

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Meters of free-space path per tick.
pub const METERS_PER_TICK: f64 = SPEED_OF_LIGHT / TICK_HZ_F64;

/// Width of the hardware timestamp register.
pub const TIMESTAMP_BITS: u32 = 40;

const MODULUS: u64 = 1 << TIMESTAMP_BITS;
const MASK: u64 = MODULUS - 1;
const HALF: i64 = 1 << (TIMESTAMP_BITS - 1);

/// A 40-bit timestamp as read from the transceiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TickTime(u64);

impl TickTime {
    pub const MAX: u64 = MASK;

    /// Builds a timestamp, rejecting values that do not fit in 40 bits.
    pub fn new(ticks: u64) -> Result<Self> {
        if ticks > MASK {
            return Err(Error::invalid(
                "timestamp",
                format!("{ticks} does not fit in {TIMESTAMP_BITS} bits"),
            ));
        }
        Ok(Self(ticks))
    }

    /// Reduces an unbounded counter value modulo 2^40.
    pub fn wrapping(ticks: i64) -> Self {
        Self((ticks as u64) & MASK)
    }

    pub fn ticks(self) -> u64 {
        self.0
    }

    /// Advances by a signed span, wrapping.
    pub fn offset(self, span: TickSpan) -> Self {
        Self(self.0.wrapping_add(span.0 as u64) & MASK)
    }
}

impl fmt::Display for TickTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A signed difference between two timestamps, in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TickSpan(i64);

impl TickSpan {
    pub const ZERO: TickSpan = TickSpan(0);

    /// Largest magnitude a wrap-aware difference can carry.
    pub const LIMIT: i64 = HALF;

    pub fn new(ticks: i64) -> Result<Self> {
        if ticks.unsigned_abs() >= HALF as u64 {
            return Err(Error::SpanOverflow(ticks as f64));
        }
        Ok(Self(ticks))
    }

    pub fn ticks(self) -> i64 {
        self.0
    }

    pub fn seconds(self) -> f64 {
        ticks_to_seconds(self)
    }

    /// Signed free-space path length covered by this span.
    pub fn meters(self) -> f64 {
        self.0 as f64 * METERS_PER_TICK
    }
}

impl std::ops::Neg for TickSpan {
    type Output = TickSpan;
    fn neg(self) -> TickSpan {
        TickSpan(-self.0)
    }
}

impl std::ops::Sub for TickSpan {
    type Output = TickSpan;
    fn sub(self, rhs: TickSpan) -> TickSpan {
        TickSpan(self.0 - rhs.0)
    }
}

impl std::ops::Add for TickSpan {
    type Output = TickSpan;
    fn add(self, rhs: TickSpan) -> TickSpan {
        TickSpan(self.0 + rhs.0)
    }
}

impl fmt::Display for TickSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Minimal-magnitude signed difference `later - earlier` modulo 2^40.
///
/// A difference of exactly 2^39 is ambiguous and is reported as -2^39.
pub fn wrap_diff(earlier: TickTime, later: TickTime) -> TickSpan {
    let d = later.0.wrapping_sub(earlier.0) & MASK;
    let d = d as i64;
    TickSpan(if d >= HALF { d - MODULUS as i64 } else { d })
}

pub fn ticks_to_seconds(span: TickSpan) -> f64 {
    span.0 as f64 / TICK_HZ_F64
}

/// Converts seconds to the nearest whole tick count.
pub fn seconds_to_ticks(seconds: f64) -> Result<TickSpan> {
    if !seconds.is_finite() {
        return Err(Error::invalid("duration", format!("{seconds} s is not finite")));
    }
    let ticks = (seconds * TICK_HZ_F64).round();
    if ticks.abs() >= HALF as f64 {
        return Err(Error::SpanOverflow(ticks));
    }
    Ok(TickSpan(ticks as i64))
}

/// Signed path length for a (possibly fractional) tick count.
pub fn ticks_f64_to_meters(ticks: f64) -> f64 {
    ticks * METERS_PER_TICK
}

pub fn span_to_meters(span: TickSpan) -> f64 {
    span.meters()
}

/// Received or transmitted power in dBm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct PowerDbm(f64);

impl PowerDbm {
    pub fn new(dbm: f64) -> Result<Self> {
        if !dbm.is_finite() {
            return Err(Error::invalid("power", format!("{dbm} dBm is not finite")));
        }
        Ok(Self(dbm))
    }

    /// Builds a receive power, also checking it against a plausibility window.
    pub fn rx(dbm: f64, window: (f64, f64)) -> Result<Self> {
        let p = Self::new(dbm)?;
        if dbm < window.0 || dbm > window.1 {
            return Err(Error::invalid(
                "receive power",
                format!("{dbm:.3} dBm outside plausible window [{}, {}] dBm", window.0, window.1),
            ));
        }
        Ok(p)
    }

    pub fn dbm(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PowerDbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dBm", self.0)
    }
}

/// A non-negative physical distance.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Meters(f64);

impl Meters {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || m < 0.0 {
            return Err(Error::invalid("distance", format!("{m} m must be finite and non-negative")));
        }
        Ok(Self(m))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// One-way free-space propagation delay.
    pub fn propagation_seconds(self) -> f64 {
        self.0 / SPEED_OF_LIGHT
    }
}

impl fmt::Display for Meters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} m", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_diff_basics() {
        let t = |v| TickTime::new(v).unwrap();
        assert_eq!(wrap_diff(t(0), t(0)).ticks(), 0);
        assert_eq!(wrap_diff(t(MASK), t(1)).ticks(), 2);
        assert_eq!(wrap_diff(t(1), t(MASK)).ticks(), -2);
        assert_eq!(wrap_diff(t(1000), t(128_000_000)).ticks(), 127_999_000);
        assert_eq!(wrap_diff(t(0), t(HALF as u64)).ticks(), -HALF);
    }

    #[test]
    fn span_seconds_matches_exact_ratio() {
        // Division of two exactly representable integers is correctly rounded,
        // so this is the exact rational 127_999_000 / 63_897_600_000 rounded once.
        let oracle = 127_999_000f64 / 63_897_600_000f64;
        let s = ticks_to_seconds(TickSpan::new(127_999_000).unwrap());
        assert_eq!(s, oracle);
        assert!((s - 2.003e-3).abs() < 1e-6);
    }

    #[test]
    fn conversions() {
        assert_eq!(seconds_to_ticks(0.0).unwrap().ticks(), 0);
        assert_eq!(seconds_to_ticks(1.0).unwrap().ticks(), 63_897_600_000);
        assert!((ticks_to_seconds(TickSpan(1)) - 1.5650e-11).abs() < 1e-15);
        assert_eq!(span_to_meters(TickSpan::ZERO), 0.0);
        let per_tick = 299_792_458f64 / 63_897_600_000f64;
        assert_eq!(span_to_meters(TickSpan(1)), per_tick);
        assert!((per_tick - 4.691e-3).abs() < 1e-6);
        let us = seconds_to_ticks(1e-6).unwrap();
        assert_eq!(us.ticks(), 63_898);
        assert!((span_to_meters(us) - 299.792).abs() < METERS_PER_TICK);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(seconds_to_ticks(9.0), Err(Error::SpanOverflow(_))));
        assert!(seconds_to_ticks(f64::NAN).is_err());
        assert!(seconds_to_ticks(8.0).is_ok());
        assert!(TickSpan::new(HALF).is_err());
    }

    #[test]
    fn timestamp_range() {
        assert!(TickTime::new(MASK).is_ok());
        assert!(TickTime::new(MODULUS).is_err());
        assert_eq!(TickTime::wrapping(MODULUS as i64 + 5).ticks(), 5);
        assert_eq!(TickTime::wrapping(-1).ticks(), MASK);
        let t = TickTime::new(MASK - 1).unwrap();
        assert_eq!(t.offset(TickSpan(3)).ticks(), 1);
    }

    #[test]
    fn unit_validation() {
        assert!(Meters::new(-0.1).is_err());
        assert!(Meters::new(0.0).is_ok());
        assert!(PowerDbm::new(f64::INFINITY).is_err());
        assert!(PowerDbm::rx(-30.0, (-120.0, -40.0)).is_err());
        assert!(PowerDbm::rx(-80.0, (-120.0, -40.0)).is_ok());
    }
}
