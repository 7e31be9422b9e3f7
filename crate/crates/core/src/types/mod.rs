//! Domain types shared by the routing, codec and simulation layers.

mod node;
mod packet;
mod path;
mod provenance;
mod tables;
mod time;

pub use node::{NodeId, NodeRole};
pub use packet::{DataPacket, DEFAULT_PAYLOAD_BYTES, SEQ_BYTES};
pub use path::PathTrace;
pub use provenance::{
    compute_digest, deserialize_provenance, serialize_provenance, BloomBits, Digest, ProvenanceField, ProvenanceKind,
    RInfoPair, BLOOM_SIZE, DIGEST_SIZE, PPPT_SIZE,
};
pub use tables::{NeighborTable, RoutingEntry, RoutingTable};
pub use time::{SimTime, TICKS_PER_SECOND};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("node id 0 is reserved")]
    UnassignedNodeId,
    #[error("no provenance to serialize")]
    NoProvenance,
    #[error("{kind:?} provenance must be {expected} bytes, got {actual}")]
    BadLength { kind: ProvenanceKind, expected: usize, actual: usize },
    #[error("malformed digest")]
    BadDigest,
    #[error("unknown child route {child} at node {owner}")]
    UnknownChildRoute { owner: NodeId, child: NodeId },
}
