//! Newline-delimited event log and the sinks the engine writes to.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::config::ScenarioConfig;
use crate::codec::Verdict;
use crate::types::NodeId;

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Corrupt { line: usize, source: serde_json::Error },
    #[error("log is empty")]
    Empty,
    #[error("first record is not a header")]
    MissingHeader,
    #[error("log is truncated: no end record")]
    Truncated,
    #[error("records after the end record")]
    TrailingRecords,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One line of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub time_ticks: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u32>,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Header {
        version: String,
        config: Box<ScenarioConfig>,
    },
    Generate {
        cpu_ticks: u64,
    },
    Transmit {
        to: NodeId,
        copy: u8,
        frame_bytes: usize,
        provenance_bytes: usize,
        tx_ticks: u64,
    },
    LinkLoss {
        to: NodeId,
        copy: u8,
    },
    Receive {
        from: NodeId,
        copy: u8,
        rx_ticks: u64,
    },
    /// Sequence number pinned to the routing entry of `child`.
    Record {
        child: NodeId,
    },
    Process {
        cpu_ticks: u64,
    },
    MaliciousDrop,
    ScriptedDrop,
    Stripped,
    Forged,
    Replayed,
    Undeliverable {
        reason: String,
    },
    Delivered {
        from: NodeId,
        /// Hex of the serialized provenance; absent when stripped.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        provenance: Option<String>,
        digest: String,
        flag: bool,
        verdict: Verdict,
    },
    /// Gap found by the root. `node` on the record is the localized node
    /// when the evidence names exactly one.
    DropDetected {
        round: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        link_to: Option<NodeId>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        candidates: Vec<NodeId>,
    },
    IntervalReset {
        round: u32,
        cleared: usize,
    },
    NodeFailed {
        reparented: Vec<(NodeId, NodeId, NodeId)>,
        detached: Vec<NodeId>,
    },
    End {
        events: u64,
        total_ticks: u64,
    },
}

impl LogRecord {
    pub fn new(time_ticks: u64, event: Event) -> Self {
        LogRecord { time_ticks, node: None, origin: None, seq: None, event }
    }

    pub fn at(mut self, node: NodeId) -> Self {
        self.node = Some(node);
        self
    }

    pub fn packet(mut self, origin: NodeId, seq: u32) -> Self {
        self.origin = Some(origin);
        self.seq = Some(seq);
        self
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log records serialize")
    }
}

/// Consumer of engine output.
pub trait EventSink {
    fn emit(&mut self, record: &LogRecord);
}

impl<A: EventSink, B: EventSink> EventSink for (A, B) {
    fn emit(&mut self, record: &LogRecord) {
        self.0.emit(record);
        self.1.emit(record);
    }
}

impl<S: EventSink + ?Sized> EventSink for &mut S {
    fn emit(&mut self, record: &LogRecord) {
        (**self).emit(record);
    }
}

/// In-memory log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<LogRecord>,
}

impl EventSink for EventLog {
    fn emit(&mut self, record: &LogRecord) {
        self.records.push(record.clone());
    }
}

impl EventLog {
    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn config(&self) -> Option<&ScenarioConfig> {
        match self.records.first().map(|r| &r.event) {
            Some(Event::Header { config, .. }) => Some(config),
            _ => None,
        }
    }

    pub fn write_ndjson(&self, mut w: impl Write) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = Vec::new();
        self.write_ndjson(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("json is utf-8")
    }

    /// SHA-256 over the NDJSON bytes, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = LogHasher::default();
        for r in &self.records {
            h.emit(r);
        }
        h.finish()
    }

    /// Parses a complete log: a header first and an end record last.
    pub fn read_ndjson(r: impl BufRead) -> Result<Self, LogError> {
        let mut records = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LogRecord =
                serde_json::from_str(&line).map_err(|source| LogError::Corrupt { line: i + 1, source })?;
            records.push(rec);
        }
        match records.first() {
            None => return Err(LogError::Empty),
            Some(LogRecord { event: Event::Header { .. }, .. }) => {}
            Some(_) => return Err(LogError::MissingHeader),
        }
        match records.iter().position(|r| matches!(r.event, Event::End { .. })) {
            None => Err(LogError::Truncated),
            Some(i) if i + 1 != records.len() => Err(LogError::TrailingRecords),
            Some(_) => Ok(EventLog { records }),
        }
    }

    pub fn parse_ndjson(text: &str) -> Result<Self, LogError> {
        Self::read_ndjson(text.as_bytes())
    }
}

/// Streaming digest of the NDJSON encoding.
#[derive(Debug, Clone, Default)]
pub struct LogHasher {
    hasher: Sha256,
}

impl EventSink for LogHasher {
    fn emit(&mut self, record: &LogRecord) {
        let line = record.to_line();
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
    }
}

impl LogHasher {
    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

/// Discards everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullSink;

impl EventSink for NullSink {
    fn emit(&mut self, _: &LogRecord) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::TopologySpec;

    fn n(id: u8) -> NodeId {
        NodeId::from_raw(id)
    }

    fn sample_log() -> EventLog {
        let mut log = EventLog::default();
        let cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders: 1 });
        log.emit(&LogRecord::new(0, Event::Header { version: "t".into(), config: Box::new(cfg) }));
        log.emit(&LogRecord::new(0, Event::Generate { cpu_ticks: 70 }).at(n(3)).packet(n(3), 1));
        log.emit(
            &LogRecord::new(
                90,
                Event::Delivered {
                    from: n(2),
                    provenance: Some("0102".into()),
                    digest: "00".into(),
                    flag: true,
                    verdict: Verdict::TraceBroken { at: n(2) },
                },
            )
            .at(n(1))
            .packet(n(3), 1),
        );
        log.emit(&LogRecord::new(100, Event::End { events: 4, total_ticks: 100 }));
        log
    }

    #[test]
    fn ndjson_round_trip() {
        let log = sample_log();
        let text = log.to_ndjson();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().contains("\"event\":\"generate\""));
        let back = EventLog::parse_ndjson(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.hash(), log.hash());
    }

    #[test]
    fn truncated_and_corrupt_logs_are_rejected() {
        let text = sample_log().to_ndjson();
        let cut: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(EventLog::parse_ndjson(&cut), Err(LogError::Truncated)));
        let bad = text.replacen("generate", "generat", 1);
        assert!(matches!(EventLog::parse_ndjson(&bad), Err(LogError::Corrupt { line: 2, .. })));
        assert!(matches!(EventLog::parse_ndjson(""), Err(LogError::Empty)));
    }

    #[test]
    fn streaming_hash_matches_buffered() {
        let log = sample_log();
        let mut h = LogHasher::default();
        for r in log.records() {
            h.emit(r);
        }
        let expected = hex::encode(Sha256::digest(log.to_ndjson().as_bytes()));
        assert_eq!(h.finish(), expected);
    }
}
