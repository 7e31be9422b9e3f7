//! Network graphs and the stock topologies used by the experiments.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dodag::DodagError;
use crate::types::{NodeId, NodeRole};

/// Undirected radio graph. Each link may carry its own loss probability;
/// links without one use the scenario's natural loss rate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopologyGraph {
    nodes: BTreeMap<NodeId, NodeRole>,
    links: BTreeMap<(NodeId, NodeId), Option<f64>>,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TopologyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, role: NodeRole) -> Result<(), DodagError> {
        if self.nodes.insert(id, role).is_some() {
            return Err(DodagError::DuplicateNode(id));
        }
        Ok(())
    }

    pub fn add_link(&mut self, a: NodeId, b: NodeId) -> Result<(), DodagError> {
        self.add_link_with_loss(a, b, None)
    }

    pub fn add_link_with_loss(&mut self, a: NodeId, b: NodeId, loss: Option<f64>) -> Result<(), DodagError> {
        if a == b {
            return Err(DodagError::SelfLink(a));
        }
        for n in [a, b] {
            if !self.nodes.contains_key(&n) {
                return Err(DodagError::UnknownNode(n));
            }
        }
        if let Some(p) = loss {
            if !(0.0..=1.0).contains(&p) {
                return Err(DodagError::BadLinkLoss { a, b, loss: p });
            }
        }
        self.links.insert(key(a, b), loss);
        Ok(())
    }

    pub(crate) fn remove_node(&mut self, id: NodeId) {
        self.nodes.remove(&id);
        self.links.retain(|(a, b), _| *a != id && *b != id);
    }

    pub fn role(&self, id: NodeId) -> Option<NodeRole> {
        self.nodes.get(&id).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, NodeRole)> + '_ {
        self.nodes.iter().map(|(id, role)| (*id, *role))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, Option<f64>)> + '_ {
        self.links.iter().map(|((a, b), loss)| (*a, *b, *loss))
    }

    pub fn has_link(&self, a: NodeId, b: NodeId) -> bool {
        self.links.contains_key(&key(a, b))
    }

    /// `None` if there is no such link; `Some(None)` if the link uses the
    /// default loss rate.
    pub fn link_loss(&self, a: NodeId, b: NodeId) -> Option<Option<f64>> {
        self.links.get(&key(a, b)).copied()
    }

    pub fn neighbors(&self, id: NodeId) -> BTreeSet<NodeId> {
        self.links
            .keys()
            .filter_map(|(a, b)| match (*a == id, *b == id) {
                (true, _) => Some(*b),
                (_, true) => Some(*a),
                _ => None,
            })
            .collect()
    }

    pub fn sources(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|(_, r)| **r == NodeRole::Source).map(|(id, _)| *id).collect()
    }

    pub fn root(&self) -> Result<NodeId, DodagError> {
        let roots: Vec<NodeId> = self.nodes.iter().filter(|(_, r)| **r == NodeRole::Root).map(|(id, _)| *id).collect();
        match roots.as_slice() {
            [] => Err(DodagError::NoRoot),
            [root] => Ok(*root),
            _ => Err(DodagError::MultipleRoots(roots)),
        }
    }

    /// Linear chain: root `1`, forwarders `2..=forwarders+1`, source
    /// `forwarders+2` at the far end.
    pub fn linear(forwarders: u8) -> Result<Self, DodagError> {
        if forwarders > 252 {
            return Err(DodagError::TooManyNodes);
        }
        let mut g = TopologyGraph::new();
        let last = forwarders + 2;
        for id in 1..=last {
            let role = match id {
                1 => NodeRole::Root,
                id if id == last => NodeRole::Source,
                _ => NodeRole::Forwarder,
            };
            g.add_node(NodeId::from_raw(id), role)?;
        }
        for id in 1..last {
            g.add_link(NodeId::from_raw(id), NodeId::from_raw(id + 1))?;
        }
        Ok(g)
    }

    /// Ten-node sample DODAG rooted at `1`.
    ///
    /// Node 3 neighbors `{1, 2, 5, 6}` and routes to `{5, 6, 8, 9, 10}`;
    /// node 6 aggregates sources 9 and 10; 7 hangs off 2 and 8 off 5.
    /// Node 6 also hears node 4, which becomes its parent if 3 fails.
    pub fn sample() -> Self {
        let mut g = TopologyGraph::new();
        let roles = [
            (1, NodeRole::Root),
            (2, NodeRole::Forwarder),
            (3, NodeRole::Forwarder),
            (4, NodeRole::Forwarder),
            (5, NodeRole::Forwarder),
            (6, NodeRole::Forwarder),
            (7, NodeRole::Source),
            (8, NodeRole::Source),
            (9, NodeRole::Source),
            (10, NodeRole::Source),
        ];
        for (id, role) in roles {
            g.add_node(NodeId::from_raw(id), role).expect("distinct ids");
        }
        let links = [(1, 2), (1, 3), (2, 3), (2, 4), (2, 7), (3, 5), (3, 6), (5, 8), (6, 9), (6, 10), (4, 6)];
        for (a, b) in links {
            g.add_link(NodeId::from_raw(a), NodeId::from_raw(b)).expect("known nodes");
        }
        g
    }

    /// `branches` disjoint chains hanging off the root, each with `depth`
    /// forwarders and one source at the end.
    pub fn branches(branches: u8, depth: u8) -> Result<Self, DodagError> {
        let total = 1 + branches as usize * (depth as usize + 1);
        if branches == 0 || total > 255 {
            return Err(DodagError::TooManyNodes);
        }
        let mut g = TopologyGraph::new();
        let root = NodeId::from_raw(1);
        g.add_node(root, NodeRole::Root)?;
        let mut next = 2u8;
        for _ in 0..branches {
            let mut prev = root;
            for level in 0..=depth {
                let id = NodeId::from_raw(next);
                next += 1;
                let role = if level == depth { NodeRole::Source } else { NodeRole::Forwarder };
                g.add_node(id, role)?;
                g.add_link(prev, id)?;
                prev = id;
            }
        }
        Ok(g)
    }
}
