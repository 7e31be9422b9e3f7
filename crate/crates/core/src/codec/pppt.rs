//! Routing-pair provenance.
//!
//! Every sender rewrites the in-packet `⟨destination, source⟩` pair and every
//! receiver pins the packet's sequence number to the routing entry of the
//! child it came from. The root walks those entries back down to rebuild
//! the path.

use crate::dodag::Dodag;
use crate::types::{DataPacket, NodeId, NodeRole, PathTrace, ProvenanceField, ProvenanceKind, RInfoPair, RoutingTable};

use super::{finish_update, CodecError, DecodeError, Decoded, DiscardReason, FlagCheck};

pub fn encode_at_source(pkt: &mut DataPacket, node: NodeId, dodag: &Dodag) -> Result<(), CodecError> {
    if dodag.role(node) != Some(NodeRole::Source) {
        return Err(CodecError::NotASource(node));
    }
    if pkt.origin != node {
        return Err(CodecError::OriginMismatch { node, origin: pkt.origin });
    }
    let parent = dodag.next_hop(node).map_err(|_| CodecError::NoPreferredParent(node))?;
    pkt.provenance = ProvenanceField::Pppt(RInfoPair::new(parent, node));
    pkt.eh_prov_flag = true;
    pkt.refresh_digest();
    Ok(())
}

/// Forwarding step at `node` for a packet received from `from_child`.
///
/// The sequence number is recorded even when the provenance was stripped
/// upstream; a stripped packet is forwarded without re-inserting a pair so
/// the root's flag check still catches it.
pub fn encode_at_forwarder(
    pkt: &mut DataPacket,
    node: NodeId,
    from_child: NodeId,
    dodag: &mut Dodag,
) -> Result<(), CodecError> {
    if node == dodag.root() {
        return Err(CodecError::RootEncode(node));
    }
    let parent = dodag.next_hop(node).map_err(|_| CodecError::NoPreferredParent(node))?;
    match &pkt.provenance {
        ProvenanceField::Pppt(_) | ProvenanceField::Absent => {}
        other => return Err(CodecError::WrongScheme { expected: ProvenanceKind::Pppt, found: other.kind() }),
    }
    let rt = dodag.routing_table_mut(node).ok_or(CodecError::UnknownChildRoute { node, child: from_child })?;
    rt.record(from_child, pkt.origin, pkt.seq)?;
    if pkt.provenance.is_absent() {
        return Ok(());
    }
    let intact = pkt.digest_matches();
    pkt.provenance = ProvenanceField::Pppt(RInfoPair::new(parent, node));
    finish_update(pkt, intact);
    Ok(())
}

/// Root records the arrival against the child it physically came from.
pub fn receive_at_root(pkt: &DataPacket, from_child: NodeId, dodag: &mut Dodag) -> Result<(), CodecError> {
    let root = dodag.root();
    let rt = dodag.routing_table_mut(root).expect("root has tables");
    rt.record(from_child, pkt.origin, pkt.seq)?;
    Ok(())
}

/// Quick provenance assessment on the extension-header flag.
pub fn check_eh_flag(pkt: &DataPacket) -> FlagCheck {
    match (pkt.eh_prov_flag, pkt.provenance.is_absent()) {
        (true, false) => FlagCheck::Accept,
        (true, true) => FlagCheck::Discard(DiscardReason::ProvenanceStripped),
        (false, _) => FlagCheck::Discard(DiscardReason::UnflaggedPacket),
    }
}

/// Read access to routing tables, as used by the root while decoding.
pub trait RtOracle {
    fn routing_table(&self, node: NodeId) -> Option<&RoutingTable>;
}

impl RtOracle for Dodag {
    fn routing_table(&self, node: NodeId) -> Option<&RoutingTable> {
        Dodag::routing_table(self, node)
    }
}

/// Rebuilds the packet path from the final routing pair and the routing
/// tables, then compares it with the root's path knowledge.
pub fn decode(pkt: &DataPacket, dodag: &Dodag) -> Result<Decoded, DecodeError> {
    decode_with_oracle(pkt, dodag, dodag)
}

/// As [`decode`], reading routing tables from `oracle` while taking path
/// knowledge and topology from `dodag`.
pub fn decode_with_oracle(pkt: &DataPacket, dodag: &Dodag, oracle: &impl RtOracle) -> Result<Decoded, DecodeError> {
    if !pkt.digest_matches() {
        return Err(DecodeError::Forged);
    }
    let pair = match &pkt.provenance {
        ProvenanceField::Pppt(pair) => *pair,
        ProvenanceField::Absent => return Err(DecodeError::MissingProvenance),
        _ => return Err(DecodeError::WrongScheme { expected: ProvenanceKind::Pppt }),
    };
    let root = dodag.root();
    if pair.destination != root {
        return Err(DecodeError::NotAddressedToRoot { destination: pair.destination });
    }
    let recorded_at_root = oracle
        .routing_table(root)
        .and_then(|rt| rt.entry(pair.source))
        .is_some_and(|e| e.has_seen(pkt.origin, pkt.seq));
    if !recorded_at_root {
        return Err(DecodeError::TraceBroken { at: root });
    }

    let (origin, seq) = (pkt.origin, pkt.seq);
    let limit = dodag.graph().len().max(1) + 1;
    let mut trace = vec![pair.source];
    let mut current = pair.source;
    while current != origin {
        let rt = oracle.routing_table(current).ok_or(DecodeError::TraceBroken { at: current })?;
        let next = match rt.children_recording(origin, seq).as_slice() {
            [] => return Err(DecodeError::TraceBroken { at: current }),
            [child] => *child,
            _ => return Err(DecodeError::Ambiguous { at: current }),
        };
        trace.push(next);
        current = next;
        if trace.len() > limit {
            return Err(DecodeError::TraceBroken { at: current });
        }
    }
    trace.reverse();
    trace.push(root);
    let trace = PathTrace(trace);
    let verified = dodag.root_path(origin) == Some(&trace);
    Ok(Decoded { trace, verified })
}

/// End of a round: clear sequence histories on every non-root table.
/// Returns the number of entries that held history.
pub fn reset_interval(dodag: &mut Dodag) -> usize {
    let root = dodag.root();
    dodag.routing_tables_mut().filter(|rt| rt.owner != root).map(|rt| rt.reset_histories()).sum()
}
