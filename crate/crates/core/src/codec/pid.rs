//! Provenance-as-ID baseline: each hop appends its node ID.

use crate::dodag::Dodag;
use crate::types::{DataPacket, NodeId, PathTrace, ProvenanceField, ProvenanceKind};

use super::{finish_update, CodecError, DecodeError, Decoded};

pub const DEFAULT_PID_CAPACITY: usize = 32;

/// Appends `node` to the ID list. The hop whose parent is the root also
/// appends the root, so a delivered list names every node on the path.
pub fn pid_encode(pkt: &mut DataPacket, node: NodeId, dodag: &Dodag, capacity: usize) -> Result<(), CodecError> {
    if node == dodag.root() {
        return Err(CodecError::RootEncode(node));
    }
    let at_origin = node == pkt.origin;
    let parent = dodag.next_hop(node).map_err(|_| CodecError::NoPreferredParent(node))?;
    let intact = at_origin || pkt.digest_matches();
    let mut ids = match std::mem::take(&mut pkt.provenance) {
        ProvenanceField::Absent if at_origin => Vec::new(),
        // Stripped upstream: leave it for the root to notice.
        ProvenanceField::Absent => return Ok(()),
        ProvenanceField::Pid(ids) => ids,
        other => {
            let found = other.kind();
            pkt.provenance = other;
            return Err(CodecError::WrongScheme { expected: ProvenanceKind::Pid, found });
        }
    };
    let added = if parent == dodag.root() { 2 } else { 1 };
    if ids.len() + added > capacity {
        pkt.provenance = ProvenanceField::Pid(ids);
        return Err(CodecError::PidOverflow { capacity });
    }
    ids.push(node);
    if added == 2 {
        ids.push(parent);
    }
    pkt.provenance = ProvenanceField::Pid(ids);
    if at_origin {
        pkt.eh_prov_flag = true;
    }
    finish_update(pkt, intact);
    Ok(())
}

/// The list is already in path order; verification compares it with the
/// root's path knowledge.
pub fn pid_decode(pkt: &DataPacket, dodag: &Dodag) -> Result<Decoded, DecodeError> {
    if !pkt.digest_matches() {
        return Err(DecodeError::Forged);
    }
    let ids = match &pkt.provenance {
        ProvenanceField::Pid(ids) => ids,
        ProvenanceField::Absent => return Err(DecodeError::MissingProvenance),
        _ => return Err(DecodeError::WrongScheme { expected: ProvenanceKind::Pid }),
    };
    if ids.is_empty() {
        return Err(DecodeError::EmptyPid);
    }
    let trace = PathTrace(ids.clone());
    let verified = dodag.root_path(pkt.origin) == Some(&trace);
    Ok(Decoded { trace, verified })
}
