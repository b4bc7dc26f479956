//! Deterministic event engine for the two message patterns the correction
//! methods rely on:
//!
//! * a **burst**: one station transmits P1, P2 and P3 to another; P1 and P3
//!   share a reference gain while P2 may use a different one, and
//! * a **two-way ranging exchange**: the reference sends message 1, the tag
//!   answers with messages 2 and 3.
//!
//! Transmissions are scheduled on the transmitter's own tick grid, so a TX
//! timestamp is exact and the true emission instant is the preimage of that
//! tick under the transmitter's clock. Receive timestamps pick up the
//! propagation delay, the receiver's power-dependent bias and jitter, and are
//! then rounded to the receiver's tick grid.
//!
//! Every burst or exchange draws from its own random stream, keyed by the
//! scenario seed and the record index, so any record can be regenerated in
//! isolation and sweeps are bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calib::DriftObservables;
use crate::models::{ChannelModel, ClockModel, PowerBiasModel, PowerMeasurementModel, SimTime};
use crate::ticks::{seconds_to_ticks, wrap_diff, Meters, PowerDbm, TickTime, TICK_HZ_F64};
use crate::{Error, Result};

const BURST_STREAM: u64 = 1;
const TWR_STREAM: u64 = 2;

fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 56) | (index & ((1 << 56) - 1)));
    rng
}

/// One transceiver: its oscillator, its receive bias and its power reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Station {
    pub id: u16,
    pub clock: ClockModel,
    pub bias: PowerBiasModel,
    pub measurement: PowerMeasurementModel,
}

impl Default for Station {
    fn default() -> Self {
        Self {
            id: 1,
            clock: ClockModel::default(),
            bias: PowerBiasModel::default(),
            measurement: PowerMeasurementModel::default(),
        }
    }
}

impl Station {
    /// An ideal station: perfect clock, no bias, exact power reports.
    pub fn ideal(id: u16) -> Self {
        Self {
            id,
            clock: ClockModel::default(),
            bias: PowerBiasModel::zero(),
            measurement: PowerMeasurementModel {
                noise_sigma_db: 0.0,
                ..PowerMeasurementModel::identity()
            },
        }
    }
}

/// Separation between the two stations over true time (seconds since zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistanceProfile {
    Constant {
        meters: f64,
    },
    ConstantVelocity {
        initial_m: f64,
        velocity_mps: f64,
    },
    ConstantAcceleration {
        initial_m: f64,
        velocity_mps: f64,
        accel_mps2: f64,
    },
}

impl Default for DistanceProfile {
    fn default() -> Self {
        DistanceProfile::Constant { meters: 1.5 }
    }
}

impl DistanceProfile {
    pub fn at(&self, t: SimTime) -> Result<Meters> {
        let s = t.secs();
        let d = match *self {
            DistanceProfile::Constant { meters } => meters,
            DistanceProfile::ConstantVelocity {
                initial_m,
                velocity_mps,
            } => initial_m + velocity_mps * s,
            DistanceProfile::ConstantAcceleration {
                initial_m,
                velocity_mps,
                accel_mps2,
            } => initial_m + velocity_mps * s + 0.5 * accel_mps2 * s * s,
        };
        if !(d > 0.0) {
            return Err(Error::invalid("distance", format!("profile reaches {d} m at t = {s} s")));
        }
        Meters::new(d)
    }
}

/// Message timing. Burst gaps and TWR delays are converted to whole ticks of
/// the transmitting station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timing {
    /// True time of record 0.
    pub start_s: f64,
    /// True time between consecutive records.
    pub period_s: f64,
    pub burst_gap_12_s: f64,
    pub burst_gap_23_s: f64,
    /// Tag delay from receiving message 1 to sending message 2.
    pub twr_response_delay_s: f64,
    /// Tag delay from sending message 2 to sending message 3.
    pub twr_third_delay_s: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            start_s: 0.0,
            period_s: 0.01,
            burst_gap_12_s: 2e-3,
            burst_gap_23_s: 2e-3,
            twr_response_delay_s: 2e-3,
            twr_third_delay_s: 2e-3,
        }
    }
}

/// Transmit gains: P1/P3 (and all TWR messages) use `reference_gain_db`;
/// P2 steps through `p2_gains_db`, `repetitions` bursts per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainSchedule {
    pub reference_gain_db: f64,
    pub p2_gains_db: Vec<f64>,
}

impl Default for GainSchedule {
    fn default() -> Self {
        Self::ladder(0.0, 0.0, -0.5, 81)
    }
}

impl GainSchedule {
    /// `count` P2 gains `start, start + step, ...`.
    pub fn ladder(reference_gain_db: f64, start_db: f64, step_db: f64, count: usize) -> Self {
        Self {
            reference_gain_db,
            p2_gains_db: (0..count).map(|k| start_db + k as f64 * step_db).collect(),
        }
    }

    /// P2 at the reference gain only.
    pub fn constant(reference_gain_db: f64) -> Self {
        Self {
            reference_gain_db,
            p2_gains_db: vec![reference_gain_db],
        }
    }
}

/// Mutual interference between closely spaced messages: when either burst
/// gap is shorter than `threshold_s`, P3's receive timestamp and reported
/// power are offset by constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Interference {
    pub enabled: bool,
    pub threshold_s: f64,
    pub timestamp_offset_ticks: f64,
    pub power_offset_db: f64,
}

impl Default for Interference {
    fn default() -> Self {
        Self {
            enabled: false,
            threshold_s: 500e-6,
            timestamp_offset_ticks: 25.0,
            power_offset_db: -1.0,
        }
    }
}

/// Radio settings carried as metadata into output headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSettings {
    pub channel: u8,
    pub center_frequency_mhz: f64,
    pub bandwidth_mhz: f64,
    pub prf_mhz: u32,
    pub preamble_length: u32,
    pub data_rate_mbps: f64,
}

impl Default for RadioSettings {
    fn default() -> Self {
        Self {
            channel: 2,
            center_frequency_mhz: 3993.6,
            bandwidth_mhz: 499.2,
            prf_mhz: 64,
            preamble_length: 128,
            data_rate_mbps: 6.81,
        }
    }
}

/// Everything needed to generate bursts and exchanges.
///
/// The `initiator` transmits bursts and acts as the ranging reference; the
/// `responder` receives bursts and acts as the tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub repetitions: usize,
    pub initiator: Station,
    pub responder: Station,
    pub channel: ChannelModel,
    pub distance: DistanceProfile,
    pub timing: Timing,
    pub gains: GainSchedule,
    pub interference: Interference,
    pub radio: RadioSettings,
}

/// Per-timestamp receive jitter that gives two-way ranging estimates a
/// spread of about 0.014 m, the noise level seen on real DW1000 pairs.
/// Default scenarios use no jitter, leaving tick quantization as the only
/// timestamp noise.
pub const PAPER_SCALE_JITTER_S: f64 = 38e-12;

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: 1,
            repetitions: 2000,
            initiator: Station {
                id: 2,
                clock: ClockModel::affine(0.21, 0.0),
                ..Station::default()
            },
            responder: Station {
                id: 1,
                clock: ClockModel::affine(1.3, 5e-6)
                    .with_warmup(-5e-6, 900.0),
                ..Station::default()
            },
            channel: ChannelModel::default(),
            distance: DistanceProfile::default(),
            timing: Timing::default(),
            gains: GainSchedule::default(),
            interference: Interference::default(),
            radio: RadioSettings::default(),
        }
    }
}

impl Scenario {
    /// Two ideal stations at a fixed distance; no drift, bias or noise.
    pub fn ideal(distance_m: f64) -> Self {
        Self {
            initiator: Station::ideal(2),
            responder: Station::ideal(1),
            distance: DistanceProfile::Constant { meters: distance_m },
            gains: GainSchedule::constant(0.0),
            repetitions: 1,
            ..Self::default()
        }
    }

    /// Same scenario with the station roles exchanged.
    pub fn swapped(&self) -> Self {
        let mut s = self.clone();
        std::mem::swap(&mut s.initiator, &mut s.responder);
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.initiator.clock.validate()?;
        self.responder.clock.validate()?;
        self.initiator.measurement.validate()?;
        self.responder.measurement.validate()?;
        self.channel.validate()?;
        if self.initiator.id == self.responder.id {
            return Err(Error::invalid("scenario", "stations need distinct ids"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("scenario", "repetitions must be at least 1"));
        }
        if self.gains.p2_gains_db.is_empty() {
            return Err(Error::invalid("scenario", "gain schedule is empty"));
        }
        let gains_ok = std::iter::once(&self.gains.reference_gain_db)
            .chain(&self.gains.p2_gains_db)
            .all(|g| g.is_finite());
        if !gains_ok {
            return Err(Error::invalid("scenario", "gains must be finite"));
        }
        let t = &self.timing;
        if !(t.start_s >= 0.0 && t.period_s > 0.0) {
            return Err(Error::invalid("timing", "start must be non-negative and period positive"));
        }
        for (name, gap) in [
            ("burst_gap_12_s", t.burst_gap_12_s),
            ("burst_gap_23_s", t.burst_gap_23_s),
            ("twr_response_delay_s", t.twr_response_delay_s),
            ("twr_third_delay_s", t.twr_third_delay_s),
        ] {
            if !(gap * TICK_HZ_F64 >= 1.0) || gap > 1.0 {
                return Err(Error::invalid(
                    "timing",
                    format!("{name} = {gap} s must be positive, at least one tick and at most 1 s"),
                ));
            }
        }
        self.distance.at(self.record_start(0))?;
        Ok(())
    }

    /// Number of bursts in a full sweep.
    pub fn sweep_len(&self) -> usize {
        self.gains.p2_gains_db.len() * self.repetitions
    }

    /// True time at which record `index` begins.
    pub fn record_start(&self, index: u64) -> SimTime {
        let start = SimTime::from_secs(self.timing.start_s).femtos();
        let period = SimTime::from_secs(self.timing.period_s).femtos();
        SimTime::from_femtos(start + index as i128 * period)
    }

    fn interfering(&self) -> bool {
        let t = &self.timing;
        self.interference.enabled && t.burst_gap_12_s.min(t.burst_gap_23_s) < self.interference.threshold_s
    }
}

/// Raw observables of one three-message burst.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstRecord {
    pub id: u64,
    pub tx_station: u16,
    pub rx_station: u16,
    /// P1, P2, P3 on the transmitter's clock.
    pub tx_times: [TickTime; 3],
    /// P1, P2, P3 on the receiver's clock.
    pub rx_times: [TickTime; 3],
    /// Reported receive power of P1, P2, P3.
    pub measured_power: [PowerDbm; 3],
    pub tx_gain_ref_db: f64,
    pub tx_gain_p2_db: f64,
}

impl BurstRecord {
    pub fn drift_observables(&self) -> Result<DriftObservables> {
        DriftObservables::new(
            wrap_diff(self.tx_times[0], self.tx_times[1]),
            wrap_diff(self.tx_times[0], self.tx_times[2]),
            wrap_diff(self.rx_times[0], self.rx_times[1]),
            wrap_diff(self.rx_times[0], self.rx_times[2]),
        )
    }

    /// Mean reported power of the two reference-gain messages.
    pub fn reference_power(&self) -> f64 {
        0.5 * (self.measured_power[0].dbm() + self.measured_power[2].dbm())
    }
}

/// Hidden ground truth behind a [`BurstRecord`].
#[derive(Debug, Clone, PartialEq)]
pub struct BurstTruth {
    pub emission: [SimTime; 3],
    pub arrival: [SimTime; 3],
    pub distance: [Meters; 3],
    pub actual_power: [PowerDbm; 3],
    pub bias_ticks: [f64; 3],
}

/// Third message of a ranging exchange (tag to reference).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdMessage {
    pub t3t_tx: TickTime,
    pub t3r_rx: TickTime,
    pub measured_power_ref_3: PowerDbm,
}

/// Raw observables of one two-way ranging exchange.
///
/// Suffix `r` marks the reference clock, `t` the tag clock.
#[derive(Debug, Clone, PartialEq)]
pub struct TwrExchange {
    pub id: u64,
    pub reference_station: u16,
    pub tag_station: u16,
    pub t1r_tx: TickTime,
    pub t1t_rx: TickTime,
    pub t2t_tx: TickTime,
    pub t2r_rx: TickTime,
    /// Reported power of message 1 at the tag.
    pub measured_power_tag: PowerDbm,
    /// Reported power of message 2 at the reference.
    pub measured_power_ref_2: PowerDbm,
    pub third: Option<ThirdMessage>,
}

/// Hidden ground truth behind a [`TwrExchange`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwrTruth {
    pub emission: [SimTime; 3],
    pub distance: [Meters; 3],
    pub actual_power: [PowerDbm; 3],
    pub bias_ticks: [f64; 3],
}

/// One reception: true arrival plus what the receiver reports.
struct Reception {
    arrival: SimTime,
    distance: Meters,
    actual: PowerDbm,
    bias_ticks: f64,
    tick: i64,
    reported: PowerDbm,
}

fn receive(
    scenario: &Scenario,
    rx: &Station,
    emission: SimTime,
    gain_db: f64,
    extra_ticks: f64,
    extra_db: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Reception> {
    let distance = scenario.distance.at(emission)?;
    let actual = scenario.channel.rx_power(distance, gain_db)?;
    let arrival = emission.add_secs(distance.propagation_seconds());
    let bias_ticks = rx.bias.bias_ticks(actual);
    let jitter: f64 = rng.sample(StandardNormal);
    let tick = rx
        .clock
        .local_ticks(arrival)
        .plus(bias_ticks + jitter * rx.clock.jitter_ticks() + extra_ticks)
        .round();
    let reported = rx
        .measurement
        .report(PowerDbm::new(actual.dbm() + extra_db)?, rng);
    Ok(Reception {
        arrival,
        distance,
        actual,
        bias_ticks,
        tick,
        reported,
    })
}

/// Burst `index` of the scenario's sweep.
pub fn run_burst(scenario: &Scenario, index: u64) -> Result<BurstRecord> {
    run_burst_traced(scenario, index).map(|(r, _)| r)
}

/// Like [`run_burst`], also returning the ground truth.
pub fn run_burst_traced(scenario: &Scenario, index: u64) -> Result<(BurstRecord, BurstTruth)> {
    let step = (index / scenario.repetitions.max(1) as u64) as usize;
    let p2_gain = *scenario.gains.p2_gains_db.get(step).ok_or_else(|| {
        Error::invalid(
            "burst index",
            format!("{index} beyond sweep of {} bursts", scenario.sweep_len()),
        )
    })?;
    let reference_gain = scenario.gains.reference_gain_db;
    let gains = [reference_gain, p2_gain, reference_gain];
    let (tx, rx) = (&scenario.initiator, &scenario.responder);
    let gap12 = seconds_to_ticks(scenario.timing.burst_gap_12_s)?.ticks();
    let gap23 = seconds_to_ticks(scenario.timing.burst_gap_23_s)?.ticks();
    if gap12 <= 0 || gap23 <= 0 {
        return Err(Error::MalformedBurst("burst gaps must be positive".into()));
    }

    let mut rng = stream_rng(scenario.seed, BURST_STREAM, index);
    let t0 = scenario.record_start(index);
    let first = tx.clock.local_ticks(t0).round();
    let tx_ticks = [first, first + gap12, first + gap12 + gap23];
    let interfering = scenario.interfering();

    let mut emission = [SimTime::ZERO; 3];
    let mut rx_ticks = [0i64; 3];
    let mut receptions = Vec::with_capacity(3);
    for m in 0..3 {
        let guess = t0.add_secs((tx_ticks[m] - first) as f64 / TICK_HZ_F64);
        emission[m] = tx.clock.instant_of(tx_ticks[m], guess);
        let (extra_ticks, extra_db) = if m == 2 && interfering {
            (
                scenario.interference.timestamp_offset_ticks,
                scenario.interference.power_offset_db,
            )
        } else {
            (0.0, 0.0)
        };
        let r = receive(scenario, rx, emission[m], gains[m], extra_ticks, extra_db, &mut rng)?;
        rx_ticks[m] = r.tick;
        receptions.push(r);
    }
    if !(rx_ticks[0] < rx_ticks[1] && rx_ticks[1] < rx_ticks[2]) {
        return Err(Error::MalformedBurst(format!(
            "receive timestamps out of order in burst {index}"
        )));
    }

    let record = BurstRecord {
        id: index,
        tx_station: tx.id,
        rx_station: rx.id,
        tx_times: tx_ticks.map(TickTime::wrapping),
        rx_times: rx_ticks.map(TickTime::wrapping),
        measured_power: [0, 1, 2].map(|m| receptions[m].reported),
        tx_gain_ref_db: reference_gain,
        tx_gain_p2_db: p2_gain,
    };
    let truth = BurstTruth {
        emission,
        arrival: [0, 1, 2].map(|m| receptions[m].arrival),
        distance: [0, 1, 2].map(|m| receptions[m].distance),
        actual_power: [0, 1, 2].map(|m| receptions[m].actual),
        bias_ticks: [0, 1, 2].map(|m| receptions[m].bias_ticks),
    };
    Ok((record, truth))
}

/// Bursts sharing one P2 gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainStep {
    pub tx_gain_p2_db: f64,
    pub records: Vec<BurstRecord>,
}

/// Groups bursts by P2 gain, keeping first-appearance order of the gains
/// and record order within each group.
pub fn group_by_gain(records: impl IntoIterator<Item = BurstRecord>) -> Vec<GainStep> {
    let mut steps: Vec<GainStep> = Vec::new();
    for r in records {
        match steps
            .iter_mut()
            .find(|s| s.tx_gain_p2_db.to_bits() == r.tx_gain_p2_db.to_bits())
        {
            Some(step) => step.records.push(r),
            None => steps.push(GainStep {
                tx_gain_p2_db: r.tx_gain_p2_db,
                records: vec![r],
            }),
        }
    }
    steps
}

/// The whole gain sweep: every step of the schedule, `repetitions` bursts each.
pub fn run_sweep(scenario: &Scenario) -> Result<Vec<GainStep>> {
    scenario.validate()?;
    let reps = scenario.repetitions as u64;
    scenario
        .gains
        .p2_gains_db
        .iter()
        .enumerate()
        .map(|(step, &gain)| {
            let records = (0..reps)
                .map(|rep| run_burst(scenario, step as u64 * reps + rep))
                .collect::<Result<Vec<_>>>()?;
            Ok(GainStep {
                tx_gain_p2_db: gain,
                records,
            })
        })
        .collect()
}

/// Ranging exchange `index`.
pub fn run_twr(scenario: &Scenario, index: u64) -> Result<TwrExchange> {
    run_twr_traced(scenario, index).map(|(x, _)| x)
}

/// Like [`run_twr`], also returning the ground truth.
pub fn run_twr_traced(scenario: &Scenario, index: u64) -> Result<(TwrExchange, TwrTruth)> {
    let (reference, tag) = (&scenario.initiator, &scenario.responder);
    let gain = scenario.gains.reference_gain_db;
    let response = seconds_to_ticks(scenario.timing.twr_response_delay_s)?;
    let third = seconds_to_ticks(scenario.timing.twr_third_delay_s)?;
    if response.ticks() <= 0 || third.ticks() <= 0 {
        return Err(Error::MalformedBurst("ranging delays must be positive".into()));
    }
    let mut rng = stream_rng(scenario.seed, TWR_STREAM, index);
    let t0 = scenario.record_start(index);

    let r1 = reference.clock.local_ticks(t0).round();
    let e1 = reference.clock.instant_of(r1, t0);
    let m1 = receive(scenario, tag, e1, gain, 0.0, 0.0, &mut rng)?;

    let t2 = m1.tick + response.ticks();
    let e2 = tag.clock.instant_of(t2, m1.arrival.add_secs(response.seconds()));
    let m2 = receive(scenario, reference, e2, gain, 0.0, 0.0, &mut rng)?;

    let t3 = t2 + third.ticks();
    let e3 = tag.clock.instant_of(t3, e2.add_secs(third.seconds()));
    let m3 = receive(scenario, reference, e3, gain, 0.0, 0.0, &mut rng)?;

    if !(r1 < m2.tick && m2.tick < m3.tick && m1.tick < t2) {
        return Err(Error::MalformedBurst(format!("exchange {index} is not causally ordered")));
    }

    let exchange = TwrExchange {
        id: index,
        reference_station: reference.id,
        tag_station: tag.id,
        t1r_tx: TickTime::wrapping(r1),
        t1t_rx: TickTime::wrapping(m1.tick),
        t2t_tx: TickTime::wrapping(t2),
        t2r_rx: TickTime::wrapping(m2.tick),
        measured_power_tag: m1.reported,
        measured_power_ref_2: m2.reported,
        third: Some(ThirdMessage {
            t3t_tx: TickTime::wrapping(t3),
            t3r_rx: TickTime::wrapping(m3.tick),
            measured_power_ref_3: m3.reported,
        }),
    };
    let truth = TwrTruth {
        emission: [e1, e2, e3],
        distance: [m1.distance, m2.distance, m3.distance],
        actual_power: [m1.actual, m2.actual, m3.actual],
        bias_ticks: [m1.bias_ticks, m2.bias_ticks, m3.bias_ticks],
    };
    Ok((exchange, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ticks::SPEED_OF_LIGHT;

    #[test]
    fn ideal_burst_spans_equal_propagation() {
        let mut s = Scenario::ideal(1.5);
        s.initiator.clock = ClockModel::affine(0.4, 0.0);
        s.responder.clock = ClockModel::affine(2.9, 0.0);
        let (b, _) = run_burst_traced(&s, 0).unwrap();
        let tof = seconds_to_ticks(1.5 / SPEED_OF_LIGHT).unwrap().ticks();
        let offset = wrap_diff(b.tx_times[0], b.rx_times[0]).ticks();
        for m in 0..3 {
            let d = wrap_diff(b.tx_times[m], b.rx_times[m]).ticks() - offset;
            assert_eq!(d, 0);
        }
        // with a shared epoch the offset is the propagation delay itself
        let mut same = Scenario::ideal(1.5);
        same.initiator.clock = ClockModel::affine(0.4, 0.0);
        same.responder.clock = ClockModel::affine(0.4, 0.0);
        let b = run_burst(&same, 0).unwrap();
        for m in 0..3 {
            assert!((wrap_diff(b.tx_times[m], b.rx_times[m]).ticks() - tof).abs() <= 1);
        }
    }

    #[test]
    fn five_ppm_burst_drift() {
        let mut s = Scenario::ideal(1.5);
        s.responder.clock = ClockModel::affine(0.0, 5e-6);
        let b = run_burst(&s, 0).unwrap();
        let obs = b.drift_observables().unwrap();
        let c13 = obs.c13().ticks();
        // 5e-6 · 4 ms · 63.8976 GHz = 1277.952 ticks
        assert!((c13 - 1278).abs() <= 1, "{c13}");
    }

    #[test]
    fn p2_gain_step_only_moves_p2() {
        let mut s = Scenario::ideal(1.5);
        s.gains = GainSchedule::ladder(0.0, 0.0, -3.0, 2);
        s.repetitions = 1;
        let a = run_burst(&s, 0).unwrap();
        let b = run_burst(&s, 1).unwrap();
        assert_eq!(a.measured_power[0], b.measured_power[0]);
        assert_eq!(a.measured_power[2], b.measured_power[2]);
        assert!((a.measured_power[1].dbm() - b.measured_power[1].dbm() - 3.0).abs() < 0.011);
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let mut s = Scenario::default();
        s.gains = GainSchedule::ladder(0.0, 0.0, -3.0, 11);
        s.repetitions = 20;
        let sweep = run_sweep(&s).unwrap();
        assert_eq!(sweep.len(), 11);
        assert!(sweep.iter().all(|st| st.records.len() == 20));
        let ids: Vec<u64> = sweep.iter().flat_map(|st| st.records.iter().map(|r| r.id)).collect();
        assert_eq!(ids, (0..220).collect::<Vec<_>>());
        assert_eq!(sweep, run_sweep(&s).unwrap());

        s.gains = GainSchedule::constant(0.0);
        s.repetitions = 1;
        let one = run_sweep(&s).unwrap();
        assert_eq!(one[0].records, vec![run_burst(&s, 0).unwrap()]);
    }

    #[test]
    fn regrouping_preserves_steps() {
        let mut s = Scenario::default();
        s.gains = GainSchedule::ladder(0.0, 0.0, -1.0, 4);
        s.repetitions = 5;
        let sweep = run_sweep(&s).unwrap();
        let flat: Vec<_> = sweep.iter().flat_map(|st| st.records.clone()).collect();
        assert_eq!(group_by_gain(flat), sweep);
    }

    #[test]
    fn rejects_bad_schedules() {
        let mut s = Scenario::ideal(1.0);
        s.timing.burst_gap_12_s = -1e-3;
        assert!(s.validate().is_err());
        assert!(run_burst(&s, 0).is_err());
        let mut s = Scenario::ideal(1.0);
        s.gains.p2_gains_db.clear();
        assert!(run_sweep(&s).is_err());
        assert!(run_burst(&Scenario::ideal(1.0), 5).is_err());
        let mut s = Scenario::ideal(1.0);
        s.repetitions = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn ideal_twr_round_trip() {
        let mut s = Scenario::ideal(3.0);
        s.initiator.clock = ClockModel::affine(0.7, 0.0);
        s.responder.clock = ClockModel::affine(5.1, 0.0);
        let x = run_twr(&s, 3).unwrap();
        let round = wrap_diff(x.t1r_tx, x.t2r_rx).ticks() - wrap_diff(x.t1t_rx, x.t2t_tx).ticks();
        let expected = 2.0 * 3.0 / SPEED_OF_LIGHT * TICK_HZ_F64;
        assert!((round as f64 - expected).abs() <= 1.0, "{round} {expected}");
    }

    #[test]
    fn tx_timestamps_ignore_power() {
        let mut s = Scenario::default();
        s.gains = GainSchedule::ladder(0.0, 0.0, -10.0, 3);
        s.repetitions = 1;
        let mut quiet = s.clone();
        quiet.responder.bias = PowerBiasModel::zero();
        for i in 0..3 {
            assert_eq!(run_burst(&s, i).unwrap().tx_times, run_burst(&quiet, i).unwrap().tx_times);
        }
    }

    #[test]
    fn interference_offsets_p3() {
        let mut s = Scenario::ideal(1.5);
        s.timing.burst_gap_12_s = 150e-6;
        s.timing.burst_gap_23_s = 150e-6;
        let clean = run_burst(&s, 0).unwrap();
        s.interference.enabled = true;
        let hit = run_burst(&s, 0).unwrap();
        assert_eq!(clean.rx_times[..2], hit.rx_times[..2]);
        assert_eq!(wrap_diff(clean.rx_times[2], hit.rx_times[2]).ticks(), 25);
        assert!((hit.measured_power[2].dbm() - clean.measured_power[2].dbm() + 1.0).abs() < 1e-9);
    }
}
