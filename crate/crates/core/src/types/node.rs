use std::fmt;

use serde::{Deserialize, Serialize};

use super::TypeError;

/// Compact node identifier.
///
/// One byte per node: the provenance size accounting (2-byte routing pair,
/// one byte per hop for ID lists) depends on it. `0` is reserved as
/// "unassigned" and never names a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct NodeId(u8);

impl NodeId {
    pub const fn new(id: u8) -> Result<Self, TypeError> {
        if id == 0 {
            Err(TypeError::UnassignedNodeId)
        } else {
            Ok(NodeId(id))
        }
    }

    /// Panics on `0`. Intended for literals in tests and examples.
    pub const fn from_raw(id: u8) -> Self {
        assert!(id != 0, "node id 0 is reserved");
        NodeId(id)
    }

    pub const fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for NodeId {
    type Error = TypeError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for u8 {
    fn from(id: NodeId) -> u8 {
        id.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Role of a node in the multipoint-to-point DODAG. Aggregators are
/// forwarders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Source,
    Forwarder,
    Root,
}
