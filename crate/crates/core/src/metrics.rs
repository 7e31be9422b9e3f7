//! Evaluation quantities. Everything except [`detect_drops`] and
//! [`provenance_size_bytes`] is a pure function of an event log.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::codec::{RtOracle, Scheme};
use crate::dodag::Dodag;
use crate::sim::{
    run, EnergyError, EnergyLedger, Event, EventSink, IdleModel, LogRecord, ScenarioConfig, SimError, TopologySpec,
};
use crate::types::{NodeId, SimTime};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("overdetection: {detected} drops detected but only {actual} happened")]
    Overdetection { detected: u64, actual: u64 },
    #[error("hop count must be at least 1")]
    ZeroHops,
    #[error("log has no header record")]
    MissingHeader,
    #[error("log has no end record")]
    MissingEnd,
    #[error("no packet reached the root")]
    NoDelivery,
    #[error("loss window must be at least 1")]
    ZeroWindow,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// What the root saw during one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RootView {
    /// First sequence number belonging to the round.
    pub window_lo: u32,
    pub delivered: BTreeMap<NodeId, BTreeSet<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Localization {
    /// The last node known to hold the packet, and the link it failed on.
    /// `link_to` is `None` only when the origin has no path.
    Node { node: NodeId, link_to: Option<NodeId> },
    /// Evidence is inconsistent; every listed node is a suspect.
    Candidates(Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetectedDrop {
    pub origin: NodeId,
    pub seq: u32,
    pub localization: Localization,
}

/// Gap scan over each source's delivered sequence numbers in the round.
///
/// Only gaps below the highest delivered number are visible: losses at the
/// tail of a round look like packets that were never sent.
pub fn detect_drops(view: &RootView, dodag: &Dodag, oracle: &impl RtOracle) -> Vec<DetectedDrop> {
    let mut out = Vec::new();
    for (&origin, seqs) in &view.delivered {
        let Some(&hi) = seqs.iter().next_back() else { continue };
        for seq in view.window_lo..hi {
            if !seqs.contains(&seq) {
                out.push(DetectedDrop { origin, seq, localization: localize(origin, seq, dodag, oracle) });
            }
        }
    }
    out
}

/// Walks the origin's root path: a node holds the packet if it is the
/// origin or its routing table recorded the sequence number. The drop sits
/// where a holder's parent is not a holder.
pub fn localize(origin: NodeId, seq: u32, dodag: &Dodag, oracle: &impl RtOracle) -> Localization {
    let Some(path) = dodag.root_path(origin) else {
        return Localization::Node { node: origin, link_to: None };
    };
    let holds = |n: NodeId| n == origin || oracle.routing_table(n).is_some_and(|rt| rt.has_seen(origin, seq));
    let breaks: Vec<(NodeId, NodeId)> =
        path.nodes().windows(2).map(|w| (w[0], w[1])).filter(|&(c, p)| holds(c) && !holds(p)).collect();
    match breaks.as_slice() {
        [(node, parent)] => Localization::Node { node: *node, link_to: Some(*parent) },
        many => Localization::Candidates(many.iter().map(|(c, _)| *c).collect()),
    }
}

/// Detected over actual drops; 1.0 when nothing was dropped.
pub fn pddr(detected: u64, actual: u64) -> Result<f64, MetricsError> {
    if detected > actual {
        return Err(MetricsError::Overdetection { detected, actual });
    }
    if actual == 0 {
        return Ok(1.0);
    }
    Ok(detected as f64 / actual as f64)
}

/// Provenance bytes observed at the root for one packet over a chain with
/// `hop_count` forwarders.
pub fn provenance_size_bytes(scheme: Scheme, hop_count: u8) -> Result<usize, MetricsError> {
    if hop_count == 0 {
        return Err(MetricsError::ZeroHops);
    }
    let mut cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders: hop_count });
    cfg.scheme = scheme;
    cfg.sim_duration_s = cfg.packet_interval_s;
    let out = run(&cfg)?;
    out.result.deliveries.first().map(|d| d.provenance_bytes).ok_or(MetricsError::NoDelivery)
}

/// Per-run facts recovered from the log alone.
#[derive(Debug, Clone)]
pub struct LogSummary {
    pub config: ScenarioConfig,
    /// In generation order.
    pub generated: Vec<(NodeId, u32)>,
    pub delivered: BTreeSet<(NodeId, u32)>,
    /// Verdict label to count, duplicates included.
    pub verdicts: BTreeMap<&'static str, usize>,
    /// Serialized provenance length of each first arrival.
    pub provenance_sizes: Vec<usize>,
    pub detected: BTreeSet<(NodeId, u32)>,
    /// Drops localized to a single node, keyed by that node.
    pub localized: BTreeMap<NodeId, usize>,
    pub total_ticks: u64,
}

impl LogSummary {
    pub fn from_records(records: &[LogRecord]) -> Result<Self, MetricsError> {
        let mut b = SummaryBuilder::default();
        for r in records {
            b.emit(r);
        }
        b.finish()
    }

    pub fn sent(&self) -> u64 {
        self.generated.len() as u64
    }

    /// Ground-truth drops: generated packets that never arrived.
    pub fn actual_drops(&self) -> u64 {
        self.generated.iter().filter(|k| !self.delivered.contains(k)).count() as u64
    }

    pub fn detected_drops(&self) -> u64 {
        self.detected.len() as u64
    }

    pub fn pddr(&self) -> Result<f64, MetricsError> {
        pddr(self.detected_drops(), self.actual_drops())
    }

    pub fn loss_rate(&self) -> f64 {
        if self.generated.is_empty() {
            0.0
        } else {
            self.actual_drops() as f64 / self.sent() as f64
        }
    }

    pub fn verdict_count(&self, label: &str) -> usize {
        self.verdicts.get(label).copied().unwrap_or(0)
    }
}

/// Streaming form of [`LogSummary::from_records`], usable as a sink so
/// long runs need not keep their log.
#[derive(Debug, Clone, Default)]
pub struct SummaryBuilder {
    summary: Option<LogSummary>,
    ended: bool,
}

impl EventSink for SummaryBuilder {
    fn emit(&mut self, r: &LogRecord) {
        if let Event::Header { config, .. } = &r.event {
            self.summary = Some(LogSummary {
                config: (**config).clone(),
                generated: Vec::new(),
                delivered: BTreeSet::new(),
                verdicts: BTreeMap::new(),
                provenance_sizes: Vec::new(),
                detected: BTreeSet::new(),
                localized: BTreeMap::new(),
                total_ticks: 0,
            });
            return;
        }
        let Some(s) = self.summary.as_mut() else { return };
        let key = r.origin.zip(r.seq);
        match &r.event {
            Event::Generate { .. } => s.generated.extend(key),
            Event::Delivered { provenance, verdict, .. } => {
                *s.verdicts.entry(verdict.label()).or_default() += 1;
                if let Some(k) = key {
                    if s.delivered.insert(k) {
                        s.provenance_sizes.push(provenance.as_ref().map_or(0, |h| h.len() / 2));
                    }
                }
            }
            Event::DropDetected { .. } => {
                if let Some(k) = key {
                    if s.detected.insert(k) {
                        if let Some(n) = r.node {
                            *s.localized.entry(n).or_default() += 1;
                        }
                    }
                }
            }
            Event::End { total_ticks, .. } => {
                s.total_ticks = *total_ticks;
                self.ended = true;
            }
            _ => {}
        }
    }
}

impl SummaryBuilder {
    pub fn finish(self) -> Result<LogSummary, MetricsError> {
        let s = self.summary.ok_or(MetricsError::MissingHeader)?;
        if !self.ended {
            return Err(MetricsError::MissingEnd);
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossPoint {
    pub sent: u64,
    pub lost: u64,
    pub rate: f64,
}

/// Cumulative loss after every `window` generated packets (and at the end).
pub fn packet_loss_series(records: &[LogRecord], window: u64) -> Result<Vec<LossPoint>, MetricsError> {
    if window == 0 {
        return Err(MetricsError::ZeroWindow);
    }
    let summary = LogSummary::from_records(records)?;
    let mut out = Vec::new();
    let mut lost = 0;
    let total = summary.generated.len() as u64;
    for (i, k) in summary.generated.iter().enumerate() {
        let sent = i as u64 + 1;
        if !summary.delivered.contains(k) {
            lost += 1;
        }
        if sent.is_multiple_of(window) || sent == total {
            out.push(LossPoint { sent, lost, rate: lost as f64 / sent as f64 });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgtSeries {
    /// Mean receive-to-forward time, in minutes, by position along the path
    /// (index 0 is the origin).
    pub per_hop_min: Vec<f64>,
    /// Mean over every forwarding step.
    pub average_min: f64,
    pub samples: usize,
}

/// Receive-to-forward deltas per hop. The origin's step starts at
/// generation.
pub fn pgt_series(records: &[LogRecord]) -> PgtSeries {
    let mut started: BTreeMap<(NodeId, NodeId, u32, u8), u64> = BTreeMap::new();
    let mut position: BTreeMap<(NodeId, u32, u8), usize> = BTreeMap::new();
    let mut per_hop: Vec<(f64, usize)> = Vec::new();
    for r in records {
        let (Some(node), Some(origin), Some(seq)) = (r.node, r.origin, r.seq) else { continue };
        match r.event {
            Event::Generate { .. } => {
                started.insert((node, origin, seq, 0), r.time_ticks);
            }
            Event::Receive { copy, .. } => {
                started.insert((node, origin, seq, copy), r.time_ticks);
            }
            Event::Transmit { copy, .. } => {
                let Some(t0) = started.remove(&(node, origin, seq, copy)) else { continue };
                let hop = position.entry((origin, seq, copy)).or_insert(0);
                if per_hop.len() <= *hop {
                    per_hop.resize(*hop + 1, (0.0, 0));
                }
                let delta = SimTime::from_ticks(r.time_ticks - t0).as_minutes();
                per_hop[*hop].0 += delta;
                per_hop[*hop].1 += 1;
                *hop += 1;
            }
            _ => {}
        }
    }
    let samples: usize = per_hop.iter().map(|(_, c)| c).sum();
    let total: f64 = per_hop.iter().map(|(s, _)| s).sum();
    PgtSeries {
        per_hop_min: per_hop.iter().map(|(s, c)| s / *c as f64).collect(),
        average_min: if samples == 0 { 0.0 } else { total / samples as f64 },
        samples,
    }
}

/// Rebuilds the energy ledger from logged radio and MCU costs.
pub fn energy_from_log(records: &[LogRecord]) -> Result<EnergyLedger, MetricsError> {
    let summary = LogSummary::from_records(records)?;
    let cfg = &summary.config;
    let graph = cfg.validate().map_err(SimError::from)?;
    let mut ledger = EnergyLedger::new(graph.node_ids());
    for r in records {
        let Some(node) = r.node else { continue };
        match r.event {
            Event::Transmit { tx_ticks, .. } => ledger.add_tx(node, tx_ticks),
            Event::Receive { rx_ticks, .. } => ledger.add_rx(node, rx_ticks),
            Event::Generate { cpu_ticks } | Event::Process { cpu_ticks } => ledger.add_cpu(node, cpu_ticks),
            _ => {}
        }
    }
    let idle = if cfg.duty_cycling {
        IdleModel::DutyCycled { rx_fraction: cfg.radio.idle_listen_fraction }
    } else {
        IdleModel::AlwaysOn
    };
    ledger.finalize(summary.total_ticks, idle)?;
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dodag::build_dodag;
    use crate::topology::TopologyGraph;

    fn n(id: u8) -> NodeId {
        NodeId::from_raw(id)
    }

    #[test]
    fn pddr_arithmetic() {
        assert_eq!(pddr(9, 10).unwrap(), 0.9);
        assert_eq!(pddr(0, 0).unwrap(), 1.0);
        assert!(matches!(pddr(3, 2), Err(MetricsError::Overdetection { detected: 3, actual: 2 })));
    }

    #[test]
    fn measured_sizes() {
        for hops in 1..=7 {
            assert_eq!(provenance_size_bytes(Scheme::Pppt, hops).unwrap(), 2);
            assert_eq!(provenance_size_bytes(Scheme::Bf, hops).unwrap(), 18);
            assert_eq!(provenance_size_bytes(Scheme::Pid, hops).unwrap(), hops as usize + 2);
        }
        assert!(matches!(provenance_size_bytes(Scheme::Pppt, 0), Err(MetricsError::ZeroHops)));
    }

    #[test]
    fn localization_on_a_chain() {
        // 9 -> 8 -> ... -> 2 -> 1
        let mut d = build_dodag(&TopologyGraph::linear(7).unwrap()).unwrap();
        let src = n(9);
        // Nodes 8..=4 saw seq 5; node 3 received it too (from 4) but 2 never did.
        for (node, child) in [(8, 9), (7, 8), (6, 7), (5, 6), (4, 5), (3, 4)] {
            d.routing_table_mut(n(node)).unwrap().record(n(child), src, 5).unwrap();
        }
        assert_eq!(localize(src, 5, &d, &d), Localization::Node { node: n(3), link_to: Some(n(2)) });
        // Nobody saw seq 6: lost on the source uplink.
        assert_eq!(localize(src, 6, &d, &d), Localization::Node { node: src, link_to: Some(n(8)) });
        // A hole in the middle gives two suspects.
        d.routing_table_mut(n(8)).unwrap().record(n(9), src, 7).unwrap();
        d.routing_table_mut(n(6)).unwrap().record(n(7), src, 7).unwrap();
        assert_eq!(localize(src, 7, &d, &d), Localization::Candidates(vec![n(8), n(6)]));
    }

    #[test]
    fn gap_scan_masks_the_tail() {
        let d = build_dodag(&TopologyGraph::linear(1).unwrap()).unwrap();
        let view = RootView { window_lo: 1, delivered: BTreeMap::from([(n(3), BTreeSet::from([1, 2, 4, 7]))]) };
        let seqs: Vec<u32> = detect_drops(&view, &d, &d).iter().map(|x| x.seq).collect();
        assert_eq!(seqs, vec![3, 5, 6]);
        let empty = RootView { window_lo: 1, delivered: BTreeMap::new() };
        assert!(detect_drops(&empty, &d, &d).is_empty());
    }

    fn rec(t: u64, event: Event) -> LogRecord {
        LogRecord::new(t, event).at(n(2)).packet(n(2), 1)
    }

    #[test]
    fn pgt_unit_conversion() {
        let hop = || Event::Transmit { to: n(1), copy: 0, frame_bytes: 0, provenance_bytes: 0, tx_ticks: 0 };
        let records = vec![
            rec(0, Event::Receive { from: n(3), copy: 0, rx_ticks: 0 }),
            rec(SimTime::from_secs_f64(0.6).ticks(), hop()),
        ];
        let pgt = pgt_series(&records);
        // 0.6 s is not a whole number of ticks; allow one tick of rounding.
        assert!((pgt.average_min - 0.01).abs() < SimTime::from_ticks(1).as_minutes());
        assert_eq!(pgt.samples, 1);
    }

    #[test]
    fn pgt_average_of_identical_deltas() {
        let mut records = Vec::new();
        for seq in 1..=5u32 {
            let base = seq as u64 * 10_000;
            let r = |t, e| LogRecord::new(t, e).at(n(2)).packet(n(2), seq);
            records.push(r(base, Event::Generate { cpu_ticks: 70 }));
            records.push(r(
                base + 70,
                Event::Transmit { to: n(1), copy: 0, frame_bytes: 0, provenance_bytes: 0, tx_ticks: 0 },
            ));
        }
        let pgt = pgt_series(&records);
        let delta = SimTime::from_ticks(70).as_minutes();
        assert!((pgt.average_min - delta).abs() < 1e-15);
        assert_eq!(pgt.per_hop_min.len(), 1);
    }
}
