//! CSV formats: timestamp logs, correction curves, power remaps and ranges.
//!
//! Every file opens with `#` comment lines carrying provenance; readers skip
//! them. Floats are written in shortest round-trip form, so reading a file
//! back yields the exact values that were written.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calib::{PowerCorrectionCurve, PowerRemap};
use crate::exchange::{BurstRecord, RadioSettings, ThirdMessage, TwrExchange};
use crate::ranging::RangeEstimate;
use crate::ticks::{PowerDbm, TickTime};
use crate::{Error, Result};

/// Header lines identifying what produced a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub radio: RadioSettings,
}

impl Provenance {
    pub fn lines(&self) -> Vec<String> {
        let r = &self.radio;
        vec![
            format!(
                "# uwb-selfcal {} {} config_sha256={} seed={}",
                env!("CARGO_PKG_VERSION"),
                self.command,
                self.config_sha256,
                self.seed
            ),
            format!(
                "# radio channel={} center_mhz={} bandwidth_mhz={} prf_mhz={} preamble={} data_rate_mbps={}",
                r.channel, r.center_frequency_mhz, r.bandwidth_mhz, r.prf_mhz, r.preamble_length, r.data_rate_mbps
            ),
        ]
    }
}

/// Opens `path` for CSV output after writing the provenance and any extra
/// comment lines.
pub fn create_csv(path: &Path, provenance: &Provenance, extra: &[String]) -> Result<csv::Writer<File>> {
    let mut file = File::create(path)?;
    for line in provenance.lines() {
        writeln!(file, "{line}")?;
    }
    for line in extra {
        writeln!(file, "# {line}")?;
    }
    Ok(csv::Writer::from_writer(file))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn row_error(path: &Path, row: u64, detail: impl Into<String>) -> Error {
    Error::Row {
        path: path.to_path_buf(),
        row,
        detail: detail.into(),
    }
}

fn csv_row_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line()).unwrap_or(0);
    row_error(path, row, e.to_string())
}

/// Reads every data row of `path` as `T`, with its line number.
fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, T)>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_row_error(path, e))?.clone();
    let mut rec = csv::StringRecord::new();
    let mut out = Vec::new();
    while rdr.read_record(&mut rec).map_err(|e| csv_row_error(path, e))? {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let value = rec
            .deserialize(Some(&headers))
            .map_err(|e| row_error(path, line, e.to_string()))?;
        out.push((line, value));
    }
    Ok(out)
}

/// `#`-comment `key=value` pairs anywhere in the file header.
fn header_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        let Some(body) = line.trim_start().strip_prefix('#') else {
            break;
        };
        for token in body.split_whitespace() {
            if let Some((k, v)) = token.split_once('=') {
                map.insert(k.to_string(), v.to_string());
            }
        }
    }
    Ok(map)
}

fn header_value<T: std::str::FromStr>(path: &Path, map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    map.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| row_error(path, 1, format!("header is missing a valid `{key}=`")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Tx,
    Rx,
}

/// One timestamp event. TX rows carry the gain, RX rows the reported power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub burst_id: u64,
    pub msg_index: u8,
    pub role: Role,
    pub station_id: u16,
    pub timestamp_ticks: u64,
    pub measured_power_dbm: Option<f64>,
    pub tx_gain_db: Option<f64>,
}

impl LogRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if !(1..=3).contains(&self.msg_index) {
            return Err(format!("msg_index {} not in 1..=3", self.msg_index));
        }
        TickTime::new(self.timestamp_ticks).map_err(|e| e.to_string())?;
        match self.role {
            Role::Rx if self.measured_power_dbm.is_none_or(|p| !p.is_finite()) => {
                Err("rx row needs a finite measured_power_dbm".into())
            }
            Role::Tx if self.tx_gain_db.is_none_or(|g| !g.is_finite()) => {
                Err("tx row needs a finite tx_gain_db".into())
            }
            _ => Ok(()),
        }
    }
}

fn tx(id: u64, msg: u8, station: u16, t: TickTime, gain: f64) -> LogRecord {
    LogRecord {
        burst_id: id,
        msg_index: msg,
        role: Role::Tx,
        station_id: station,
        timestamp_ticks: t.ticks(),
        measured_power_dbm: None,
        tx_gain_db: Some(gain),
    }
}

fn rx(id: u64, msg: u8, station: u16, t: TickTime, power: PowerDbm) -> LogRecord {
    LogRecord {
        burst_id: id,
        msg_index: msg,
        role: Role::Rx,
        station_id: station,
        timestamp_ticks: t.ticks(),
        measured_power_dbm: Some(power.dbm()),
        tx_gain_db: None,
    }
}

pub fn burst_to_log(b: &BurstRecord) -> Vec<LogRecord> {
    let gains = [b.tx_gain_ref_db, b.tx_gain_p2_db, b.tx_gain_ref_db];
    (0..3)
        .flat_map(|m| {
            let msg = m as u8 + 1;
            [
                tx(b.id, msg, b.tx_station, b.tx_times[m], gains[m]),
                rx(b.id, msg, b.rx_station, b.rx_times[m], b.measured_power[m]),
            ]
        })
        .collect()
}

/// Log rows of an exchange; `gain_db` is recorded on every transmission.
pub fn exchange_to_log(x: &TwrExchange, gain_db: f64) -> Vec<LogRecord> {
    let (r, t) = (x.reference_station, x.tag_station);
    let mut rows = vec![
        tx(x.id, 1, r, x.t1r_tx, gain_db),
        rx(x.id, 1, t, x.t1t_rx, x.measured_power_tag),
        tx(x.id, 2, t, x.t2t_tx, gain_db),
        rx(x.id, 2, r, x.t2r_rx, x.measured_power_ref_2),
    ];
    if let Some(m3) = &x.third {
        rows.push(tx(x.id, 3, t, m3.t3t_tx, gain_db));
        rows.push(rx(x.id, 3, r, m3.t3r_rx, m3.measured_power_ref_3));
    }
    rows
}

pub fn write_log(path: &Path, provenance: &Provenance, rows: impl IntoIterator<Item = LogRecord>) -> Result<()> {
    let mut w = create_csv(path, provenance, &[])?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of a replayed log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedLog {
    pub bursts: Vec<BurstRecord>,
    pub exchanges: Vec<TwrExchange>,
    /// Groups with missing or inconsistent messages, by id.
    pub skipped: Vec<u64>,
}

/// Reads a log and assembles bursts and exchanges, in order of first
/// appearance. A group whose three transmissions come from one station is a
/// burst; one whose first transmission comes from the other station is an
/// exchange.
pub fn read_log(path: &Path) -> Result<ParsedLog> {
    let rows = read_rows::<LogRecord>(path)?;
    if rows.is_empty() {
        return Err(Error::Empty(format!("{} has no log rows", path.display())));
    }
    let mut order: Vec<u64> = Vec::new();
    let mut groups: BTreeMap<u64, Vec<LogRecord>> = BTreeMap::new();
    for (line, rec) in rows {
        rec.check().map_err(|d| row_error(path, line, d))?;
        let group = groups.entry(rec.burst_id).or_insert_with(|| {
            order.push(rec.burst_id);
            Vec::new()
        });
        if group.iter().any(|g| g.msg_index == rec.msg_index && g.role == rec.role) {
            return Err(row_error(
                path,
                line,
                format!("duplicate {:?} row for message {} of {}", rec.role, rec.msg_index, rec.burst_id),
            ));
        }
        group.push(rec);
    }
    let mut parsed = ParsedLog::default();
    for id in order {
        let group = &groups[&id];
        match assemble(id, group) {
            Some(Assembled::Burst(b)) => parsed.bursts.push(b),
            Some(Assembled::Exchange(x)) => parsed.exchanges.push(x),
            None => parsed.skipped.push(id),
        }
    }
    Ok(parsed)
}

enum Assembled {
    Burst(BurstRecord),
    Exchange(TwrExchange),
}

fn assemble(id: u64, group: &[LogRecord]) -> Option<Assembled> {
    let find = |msg: u8, role: Role| group.iter().find(|r| r.msg_index == msg && r.role == role);
    let t = |r: &LogRecord| TickTime::new(r.timestamp_ticks).ok();
    let p = |r: &LogRecord| r.measured_power_dbm.and_then(|v| PowerDbm::new(v).ok());
    let (tx1, rx1, tx2, rx2) = (find(1, Role::Tx)?, find(1, Role::Rx)?, find(2, Role::Tx)?, find(2, Role::Rx)?);
    if tx1.station_id == rx1.station_id || tx2.station_id == rx2.station_id {
        return None;
    }
    if tx1.station_id == tx2.station_id {
        let (tx3, rx3) = (find(3, Role::Tx)?, find(3, Role::Rx)?);
        if tx3.station_id != tx1.station_id || rx2.station_id != rx1.station_id || rx3.station_id != rx1.station_id {
            return None;
        }
        if tx1.tx_gain_db?.to_bits() != tx3.tx_gain_db?.to_bits() {
            return None;
        }
        return Some(Assembled::Burst(BurstRecord {
            id,
            tx_station: tx1.station_id,
            rx_station: rx1.station_id,
            tx_times: [t(tx1)?, t(tx2)?, t(tx3)?],
            rx_times: [t(rx1)?, t(rx2)?, t(rx3)?],
            measured_power: [p(rx1)?, p(rx2)?, p(rx3)?],
            tx_gain_ref_db: tx1.tx_gain_db?,
            tx_gain_p2_db: tx2.tx_gain_db?,
        }));
    }
    // exchange: reference sends 1 and receives 2 and 3
    if tx2.station_id != rx1.station_id || rx2.station_id != tx1.station_id {
        return None;
    }
    let third = match (find(3, Role::Tx), find(3, Role::Rx)) {
        (Some(tx3), Some(rx3)) => {
            if tx3.station_id != tx2.station_id || rx3.station_id != tx1.station_id {
                return None;
            }
            Some(ThirdMessage {
                t3t_tx: t(tx3)?,
                t3r_rx: t(rx3)?,
                measured_power_ref_3: p(rx3)?,
            })
        }
        (None, None) => None,
        _ => return None,
    };
    Some(Assembled::Exchange(TwrExchange {
        id,
        reference_station: tx1.station_id,
        tag_station: rx1.station_id,
        t1r_tx: t(tx1)?,
        t1t_rx: t(rx1)?,
        t2t_tx: t(tx2)?,
        t2r_rx: t(rx2)?,
        measured_power_tag: p(rx1)?,
        measured_power_ref_2: p(rx2)?,
        third,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    power_dbm: f64,
    correction_ticks: f64,
}

pub fn write_curve(path: &Path, provenance: &Provenance, curve: &PowerCorrectionCurve) -> Result<()> {
    let header = format!(
        "station_id={} reference_power_dbm={}",
        curve.station_id(),
        curve.reference_power_dbm()
    );
    let mut w = create_csv(path, provenance, &[header])?;
    for &(power_dbm, correction_ticks) in curve.knots() {
        w.serialize(CurveRow {
            power_dbm,
            correction_ticks,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve(path: &Path) -> Result<PowerCorrectionCurve> {
    let header = header_values(path)?;
    let station: u16 = header_value(path, &header, "station_id")?;
    let reference: f64 = header_value(path, &header, "reference_power_dbm")?;
    let knots: Vec<(f64, f64)> = read_rows::<CurveRow>(path)?
        .into_iter()
        .map(|(_, r)| (r.power_dbm, r.correction_ticks))
        .collect();
    PowerCorrectionCurve::new(station, reference, knots).map_err(|e| row_error(path, 0, e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
struct RemapRow {
    measured_dbm: f64,
    actual_dbm: f64,
}

pub fn write_remap(path: &Path, provenance: &Provenance, remap: &PowerRemap) -> Result<()> {
    let header = format!(
        "station_id={} slope={} intercept_dbm={} fit_residual_db={}",
        remap.station_id, remap.slope, remap.intercept_dbm, remap.fit_residual_db
    );
    let mut w = create_csv(path, provenance, &[header])?;
    for &(measured_dbm, actual_dbm) in &remap.knots {
        w.serialize(RemapRow {
            measured_dbm,
            actual_dbm,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_remap(path: &Path) -> Result<PowerRemap> {
    let header = header_values(path)?;
    let knots = read_rows::<RemapRow>(path)?
        .into_iter()
        .map(|(_, r)| (r.measured_dbm, r.actual_dbm))
        .collect();
    PowerRemap::new(
        header_value(path, &header, "station_id")?,
        header_value(path, &header, "slope")?,
        header_value(path, &header, "intercept_dbm")?,
        header_value(path, &header, "fit_residual_db")?,
        knots,
    )
    .map_err(|e| row_error(path, 0, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub exchange_id: u64,
    pub range_m: f64,
    pub toa_s: f64,
    pub raw_half_s: f64,
    pub drift_s: f64,
    pub e1_s: f64,
    pub e2_s: f64,
    pub z_s: f64,
    pub e3_mismatch_s: f64,
    pub clamped: bool,
}

impl From<&RangeEstimate> for RangeRow {
    fn from(e: &RangeEstimate) -> Self {
        let c = &e.components;
        Self {
            exchange_id: e.exchange_id,
            range_m: e.range_m,
            toa_s: e.toa_s,
            raw_half_s: c.raw_half_s,
            drift_s: c.drift_s,
            e1_s: c.e1_s,
            e2_s: c.e2_s,
            z_s: c.z_s,
            e3_mismatch_s: c.e3_mismatch_s,
            clamped: e.clamped,
        }
    }
}

pub fn write_ranges(path: &Path, provenance: &Provenance, ranges: &[RangeEstimate]) -> Result<()> {
    let mut w = create_csv(path, provenance, &[])?;
    for r in ranges {
        w.serialize(RangeRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ranges(path: &Path) -> Result<Vec<RangeRow>> {
    Ok(read_rows(path)?.into_iter().map(|(_, r)| r).collect())
}

/// Data lines of a CSV file, without comment lines.
pub fn data_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(str::to_string)
        .collect())
}
