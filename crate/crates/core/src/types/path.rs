use std::fmt;

use serde::{Deserialize, Serialize};

use super::NodeId;

/// Ordered node sequence from the data source up to the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathTrace(pub Vec<NodeId>);

impl PathTrace {
    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn source(&self) -> Option<NodeId> {
        self.0.first().copied()
    }

    pub fn sink(&self) -> Option<NodeId> {
        self.0.last().copied()
    }

    /// Number of links traversed.
    pub fn hops(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.0.contains(&node)
    }
}

impl fmt::Display for PathTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join(" -> "))
    }
}
