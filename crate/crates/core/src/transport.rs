//! Deterministic simulated transport.
//!
//! Time is virtual: a [`VirtualClock`] only moves when a replay or a test
//! advances it, so replaying a log is instantaneous and reproducible. Output
//! reports written by the registry land in a per-device outbound log.
//!
//! Replay logs are UTF-8 JSONL, one record per line:
//!
//! ```text
//! {"t_ms":0,"reportId":63,"data":"01"}
//! {"t_ms":15,"reportId":63,"data":"00"}
//! ```
//!
//! `t_ms` is non-decreasing, `reportId` is 0–255 and `data` is a non-empty
//! lowercase hex string.
//!
//! A transport backed by real hardware implements [`Transport`] and feeds
//! input reports through [`Registry::inject_input_report`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{DeviceError, DeviceId, InputReportEvent, Registry};

/// Milliseconds of virtual time. Never moves backwards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VirtualClock {
    now_ms: u64,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    /// Moves the clock to `t_ms`, or leaves it alone if it is already later.
    pub fn advance_to(&mut self, t_ms: u64) {
        self.now_ms = self.now_ms.max(t_ms);
    }

    pub fn advance_by(&mut self, delta_ms: u64) {
        self.now_ms = self.now_ms.saturating_add(delta_ms);
    }
}

/// The host side of a device link: a time source and a way to write output
/// reports.
pub trait Transport: Send {
    fn now_ms(&self) -> u64;
    fn write_report(&mut self, device: DeviceId, report_id: u8, data: &[u8]) -> Result<(), String>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutboundRecord {
    pub t_ms: u64,
    #[serde(rename = "reportId")]
    pub report_id: u8,
    #[serde(serialize_with = "lower_hex::serialize")]
    pub data: Vec<u8>,
}

#[derive(Debug, Default)]
pub struct SimTransport {
    pub clock: VirtualClock,
    outbound: BTreeMap<DeviceId, Vec<OutboundRecord>>,
}

impl SimTransport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every report written to `device`, in send order.
    pub fn outbound_log(&self, device: &DeviceId) -> &[OutboundRecord] {
        self.outbound.get(device).map_or(&[], Vec::as_slice)
    }
}

impl Transport for SimTransport {
    fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    fn write_report(&mut self, device: DeviceId, report_id: u8, data: &[u8]) -> Result<(), String> {
        self.outbound.entry(device).or_default().push(OutboundRecord {
            t_ms: self.clock.now_ms(),
            report_id,
            data: data.to_vec(),
        });
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayRecord {
    pub t_ms: u64,
    #[serde(rename = "reportId")]
    pub report_id: u8,
    #[serde(with = "lower_hex")]
    pub data: Vec<u8>,
}

impl From<&InputReportEvent> for ReplayRecord {
    fn from(event: &InputReportEvent) -> Self {
        ReplayRecord {
            t_ms: event.timestamp_ms,
            report_id: event.report_id,
            data: event.data.clone(),
        }
    }
}

mod lower_hex {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(data: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(data))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Err(de::Error::custom("data is empty"));
        }
        if !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(de::Error::custom("data must be lowercase hex"));
        }
        hex::decode(&s).map_err(de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("ParseError: line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("NonMonotoneTimestamp: line {line}")]
    NonMonotoneTimestamp { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads a replay log. Blank lines are skipped; line numbers are 1-based.
pub fn read_replay<R: BufRead>(reader: R) -> Result<Vec<ReplayRecord>, ReplayError> {
    let mut records: Vec<ReplayRecord> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ReplayRecord = serde_json::from_str(&line).map_err(|e| ReplayError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if records.last().is_some_and(|prev| record.t_ms < prev.t_ms) {
            return Err(ReplayError::NonMonotoneTimestamp { line: line_no });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_replay(path: &Path) -> Result<Vec<ReplayRecord>, ReplayError> {
    read_replay(BufReader::new(File::open(path)?))
}

pub fn write_replay<W: Write>(mut out: W, records: &[ReplayRecord]) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Feeds `records` to `device` as input reports, advancing the clock to each
/// record's timestamp first. Records after `until_ms` are not injected; the
/// clock then stops at `until_ms`.
///
/// Returns the number of reports injected, whether or not anyone was
/// listening.
pub fn run_replay(
    registry: &mut Registry<SimTransport>,
    device: DeviceId,
    records: &[ReplayRecord],
    until_ms: Option<u64>,
) -> Result<usize, DeviceError> {
    if registry.device(&device).is_none() {
        return Err(DeviceError::DeviceDetached(device));
    }
    let mut injected = 0;
    for record in records {
        if until_ms.is_some_and(|limit| record.t_ms > limit) {
            break;
        }
        registry.transport_mut().clock.advance_to(record.t_ms);
        registry.inject_input_report(device, record.report_id, &record.data)?;
        injected += 1;
    }
    if let Some(limit) = until_ms {
        registry.transport_mut().clock.advance_to(limit);
    }
    Ok(injected)
}
