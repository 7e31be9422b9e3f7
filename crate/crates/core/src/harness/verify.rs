//! Offline re-assessment of every delivery in a log.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::HarnessError;
use crate::codec::{assess, reset_interval, Verdict};
use crate::dodag::Dodag;
use crate::sim::{Event, EventLog};
use crate::types::{deserialize_provenance, DataPacket, Digest, NodeId, ProvenanceField};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub deliveries: usize,
    /// Verdict label to count, as recomputed.
    pub counts: BTreeMap<String, usize>,
    /// Deliveries whose recomputed verdict differs from the logged one.
    pub mismatches: Vec<(NodeId, u32)>,
}

impl VerifyReport {
    pub fn count(&self, label: &str) -> usize {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn fraction(&self, label: &str) -> f64 {
        if self.deliveries == 0 {
            0.0
        } else {
            self.count(label) as f64 / self.deliveries as f64
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Rebuilds routing state from the logged record/reset/failure events and
/// reruns the root's assessment on each logged arrival.
pub fn verify_log(log: &EventLog) -> Result<VerifyReport, HarnessError> {
    let cfg = log.config().ok_or_else(|| HarnessError::Inconsistent("no header".into()))?;
    let graph = cfg.validate()?;
    let mut dodag = Dodag::build(&graph, cfg.interval_i as usize).map_err(crate::sim::ConfigError::from)?;
    let kind = cfg.scheme.provenance_kind();
    let mut seen = BTreeSet::new();
    let mut report = VerifyReport::default();

    for r in log.records() {
        let packet = r.origin.zip(r.seq);
        match &r.event {
            Event::Record { child } => {
                let (Some(node), Some((origin, seq))) = (r.node, packet) else {
                    return Err(HarnessError::Inconsistent("record event without node or packet".into()));
                };
                let rt = dodag
                    .routing_table_mut(node)
                    .ok_or_else(|| HarnessError::Inconsistent(format!("record at unknown node {node}")))?;
                rt.record(*child, origin, seq)
                    .map_err(|e| HarnessError::Inconsistent(format!("replaying record: {e}")))?;
            }
            Event::IntervalReset { .. } => {
                reset_interval(&mut dodag);
            }
            Event::NodeFailed { .. } => {
                let node = r.node.ok_or_else(|| HarnessError::Inconsistent("failure without node".into()))?;
                dodag.reparent(node).map_err(|e| HarnessError::Inconsistent(format!("replaying failure: {e}")))?;
            }
            Event::Delivered { provenance, digest, flag, verdict, .. } => {
                let Some((origin, seq)) = packet else {
                    return Err(HarnessError::Inconsistent("delivery without packet".into()));
                };
                let mut pkt = DataPacket::new(origin, seq, cfg.payload_bytes);
                pkt.provenance = match (provenance, kind) {
                    (None, _) | (Some(_), None) => ProvenanceField::Absent,
                    (Some(h), Some(kind)) => {
                        let bytes = hex::decode(h).map_err(|e| HarnessError::Inconsistent(e.to_string()))?;
                        deserialize_provenance(kind, &bytes).map_err(|e| HarnessError::Inconsistent(e.to_string()))?
                    }
                };
                pkt.digest = Digest::from_hex(digest).map_err(|e| HarnessError::Inconsistent(e.to_string()))?;
                pkt.eh_prov_flag = *flag;
                let recomputed = if seen.insert((origin, seq)) {
                    assess(&pkt, cfg.scheme, &dodag).verdict
                } else {
                    Verdict::Duplicate
                };
                report.deliveries += 1;
                *report.counts.entry(recomputed.label().to_string()).or_default() += 1;
                if recomputed != *verdict {
                    report.mismatches.push((origin, seq));
                }
            }
            _ => {}
        }
    }
    Ok(report)
}
