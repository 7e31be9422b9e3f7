//! DODAG formation and maintenance under the hop-count objective.
//!
//! Convergence is computed in one shot: ranks are BFS hop counts from the
//! root, each node prefers its lowest-rank neighbor (smallest id on ties),
//! and every ancestor learns a storing-mode route to each descendant.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::topology::TopologyGraph;
use crate::types::{NeighborTable, NodeId, NodeRole, PathTrace, RoutingEntry, RoutingTable};

/// Default sequence-history window per origin, also the reset interval.
pub const DEFAULT_INTERVAL: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DodagError {
    #[error("topology has no root")]
    NoRoot,
    #[error("topology has multiple roots: {0:?}")]
    MultipleRoots(Vec<NodeId>),
    #[error("nodes unreachable from root: {0:?}")]
    Unreachable(Vec<NodeId>),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),
    #[error("self link at node {0}")]
    SelfLink(NodeId),
    #[error("link {a}-{b} loss {loss} outside [0, 1]")]
    BadLinkLoss { a: NodeId, b: NodeId, loss: f64 },
    #[error("topology exceeds the one-byte id space")]
    TooManyNodes,
    #[error("node {0} is the root")]
    IsRoot(NodeId),
    #[error("node {0} is detached: no preferred parent")]
    Detached(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeTables {
    pub neighbor: NeighborTable,
    pub routing: RoutingTable,
}

/// Outcome of removing a failed node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReparentReport {
    /// `(node, old parent, new parent)` for every node whose parent changed.
    pub reparented: Vec<(NodeId, NodeId, NodeId)>,
    pub detached: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct Dodag {
    graph: TopologyGraph,
    root: NodeId,
    history_capacity: usize,
    rank: BTreeMap<NodeId, u32>,
    parent_of: BTreeMap<NodeId, NodeId>,
    tables: BTreeMap<NodeId, NodeTables>,
    root_paths: BTreeMap<NodeId, PathTrace>,
    detached: BTreeSet<NodeId>,
    failed: BTreeSet<NodeId>,
}

pub fn build_dodag(g: &TopologyGraph) -> Result<Dodag, DodagError> {
    Dodag::build(g, DEFAULT_INTERVAL)
}

impl Dodag {
    /// Builds the converged DODAG. Every node must be reachable from the
    /// single root.
    pub fn build(g: &TopologyGraph, history_capacity: usize) -> Result<Dodag, DodagError> {
        let root = g.root()?;
        let mut dodag = Dodag {
            graph: g.clone(),
            root,
            history_capacity: history_capacity.max(1),
            rank: BTreeMap::new(),
            parent_of: BTreeMap::new(),
            tables: BTreeMap::new(),
            root_paths: BTreeMap::new(),
            detached: BTreeSet::new(),
            failed: BTreeSet::new(),
        };
        dodag.converge();
        if !dodag.detached.is_empty() {
            return Err(DodagError::Unreachable(dodag.detached.iter().copied().collect()));
        }
        Ok(dodag)
    }

    fn converge(&mut self) {
        let root = self.root;
        let mut rank = BTreeMap::from([(root, 0u32)]);
        let mut queue = VecDeque::from([root]);
        while let Some(n) = queue.pop_front() {
            let r = rank[&n];
            for m in self.graph.neighbors(n) {
                if let std::collections::btree_map::Entry::Vacant(e) = rank.entry(m) {
                    e.insert(r + 1);
                    queue.push_back(m);
                }
            }
        }

        let mut parent_of = BTreeMap::new();
        for (&n, &r) in &rank {
            if n == root {
                continue;
            }
            // BTreeSet iteration is ascending, so the first hit is the
            // smallest id among the minimum-rank neighbors.
            let parent = self
                .graph
                .neighbors(n)
                .into_iter()
                .filter(|m| rank.get(m) == Some(&(r - 1)))
                .min_by_key(|m| (rank[m], *m))
                .expect("BFS rank implies a lower-rank neighbor");
            parent_of.insert(n, parent);
        }

        let mut old_entries: BTreeMap<NodeId, BTreeMap<NodeId, RoutingEntry>> =
            self.tables.iter_mut().map(|(id, t)| (*id, t.routing.take_entries())).collect();

        let mut tables = BTreeMap::new();
        for (id, _) in self.graph.nodes() {
            let mut nt = NeighborTable::new(id);
            nt.neighbors = self.graph.neighbors(id).into_iter().collect();
            nt.parent = parent_of.get(&id).copied();
            if let Some(&r) = rank.get(&id) {
                nt.substitutes = nt
                    .neighbors
                    .iter()
                    .copied()
                    .filter(|m| Some(*m) != nt.parent && rank.get(m).is_some_and(|mr| *mr < r))
                    .collect();
            }
            tables.insert(id, NodeTables { neighbor: nt, routing: RoutingTable::new(id) });
        }

        let mut root_paths = BTreeMap::new();
        for &n in parent_of.keys() {
            let mut path = vec![n];
            let mut child = n;
            while let Some(&p) = parent_of.get(&child) {
                let rt = &mut tables.get_mut(&p).expect("parent has tables").routing;
                let cap = self.history_capacity;
                let entry = rt.entry_mut_or_insert(child, cap);
                entry.destinations.insert(n);
                path.push(p);
                child = p;
            }
            root_paths.insert(n, PathTrace(path));
        }

        // Carry sequence history over for routes that survived.
        for (id, t) in tables.iter_mut() {
            if let Some(mut old) = old_entries.remove(id) {
                let fresh: Vec<RoutingEntry> = t.routing.entries().cloned().collect();
                for entry in fresh {
                    if let Some(mut kept) = old.remove(&entry.child) {
                        kept.destinations = entry.destinations.clone();
                        t.routing.insert_entry(kept);
                    }
                }
            }
        }

        self.detached = self.graph.node_ids().filter(|n| !rank.contains_key(n)).collect();
        self.rank = rank;
        self.parent_of = parent_of;
        self.tables = tables;
        self.root_paths = root_paths;
    }

    /// Removes `failed` and lets the orphaned subtree re-select parents.
    /// Nodes left without any route to the root are marked detached.
    pub fn reparent(&mut self, failed: NodeId) -> Result<ReparentReport, DodagError> {
        if failed == self.root {
            return Err(DodagError::IsRoot(failed));
        }
        if self.graph.role(failed).is_none() {
            return Err(DodagError::UnknownNode(failed));
        }
        let before = self.parent_of.clone();
        self.graph.remove_node(failed);
        self.failed.insert(failed);
        self.converge();
        let reparented = self
            .parent_of
            .iter()
            .filter_map(|(n, p)| match before.get(n) {
                Some(old) if old != p => Some((*n, *old, *p)),
                _ => None,
            })
            .collect();
        Ok(ReparentReport { reparented, detached: self.detached.iter().copied().collect() })
    }

    /// Adds a node (e.g. after a DIS solicitation) and reconverges.
    pub fn join(&mut self, node: NodeId, role: NodeRole, links: &[NodeId]) -> Result<(), DodagError> {
        if role == NodeRole::Root {
            return Err(DodagError::MultipleRoots(vec![self.root, node]));
        }
        self.graph.add_node(node, role)?;
        for &l in links {
            self.graph.add_link(node, l)?;
        }
        self.failed.remove(&node);
        self.converge();
        Ok(())
    }

    pub fn next_hop(&self, at: NodeId) -> Result<NodeId, DodagError> {
        if at == self.root {
            return Err(DodagError::IsRoot(at));
        }
        if self.graph.role(at).is_none() {
            return Err(DodagError::UnknownNode(at));
        }
        self.parent_of.get(&at).copied().ok_or(DodagError::Detached(at))
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn graph(&self) -> &TopologyGraph {
        &self.graph
    }

    pub fn history_capacity(&self) -> usize {
        self.history_capacity
    }

    pub fn role(&self, n: NodeId) -> Option<NodeRole> {
        self.graph.role(n)
    }

    pub fn rank(&self, n: NodeId) -> Option<u32> {
        self.rank.get(&n).copied()
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parent_of.get(&n).copied()
    }

    pub fn is_attached(&self, n: NodeId) -> bool {
        self.rank.contains_key(&n)
    }

    pub fn is_detached(&self, n: NodeId) -> bool {
        self.detached.contains(&n)
    }

    pub fn has_failed(&self, n: NodeId) -> bool {
        self.failed.contains(&n)
    }

    pub fn detached(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.detached.iter().copied()
    }

    /// Live nodes, attached or not.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.graph.node_ids()
    }

    pub fn neighbor_table(&self, n: NodeId) -> Option<&NeighborTable> {
        self.tables.get(&n).map(|t| &t.neighbor)
    }

    pub fn routing_table(&self, n: NodeId) -> Option<&RoutingTable> {
        self.tables.get(&n).map(|t| &t.routing)
    }

    pub(crate) fn routing_table_mut(&mut self, n: NodeId) -> Option<&mut RoutingTable> {
        self.tables.get_mut(&n).map(|t| &mut t.routing)
    }

    pub fn routing_tables(&self) -> impl Iterator<Item = &RoutingTable> {
        self.tables.values().map(|t| &t.routing)
    }

    pub(crate) fn routing_tables_mut(&mut self) -> impl Iterator<Item = &mut RoutingTable> {
        self.tables.values_mut().map(|t| &mut t.routing)
    }

    /// The root's a-priori knowledge of the path from `source`.
    pub fn root_path(&self, source: NodeId) -> Option<&PathTrace> {
        self.root_paths.get(&source)
    }

    pub fn root_paths(&self) -> &BTreeMap<NodeId, PathTrace> {
        &self.root_paths
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(id: u8) -> NodeId {
        NodeId::from_raw(id)
    }

    fn ids(v: &[u8]) -> Vec<NodeId> {
        v.iter().map(|i| n(*i)).collect()
    }

    #[test]
    fn sample_routing_tables_match_storing_mode() {
        let d = build_dodag(&TopologyGraph::sample()).unwrap();
        let rt3 = d.routing_table(n(3)).unwrap();
        assert_eq!(rt3.children().collect::<Vec<_>>(), ids(&[5, 6]));
        assert_eq!(rt3.reachable().into_iter().collect::<Vec<_>>(), ids(&[5, 6, 8, 9, 10]));
        assert_eq!(d.neighbor_table(n(3)).unwrap().neighbors, ids(&[1, 2, 5, 6]));
        assert_eq!(d.next_hop(n(10)).unwrap(), n(6));
        assert_eq!(d.next_hop(n(6)).unwrap(), n(3));
        assert_eq!(d.next_hop(n(7)).unwrap(), n(2));
        assert_eq!(d.root_path(n(10)).unwrap().nodes(), ids(&[10, 6, 3, 1]).as_slice());
    }

    #[test]
    fn substitutes_are_other_lower_rank_neighbors() {
        let d = build_dodag(&TopologyGraph::sample()).unwrap();
        // 3 has rank 1: only the root is lower.
        assert!(d.neighbor_table(n(3)).unwrap().substitutes.is_empty());
        let g = {
            let mut g = TopologyGraph::linear(2).unwrap();
            g.add_link(n(1), n(3)).unwrap();
            g.add_link(n(2), n(4)).unwrap();
            g
        };
        let d = build_dodag(&g).unwrap();
        assert_eq!(d.parent(n(4)), Some(n(2)));
        assert_eq!(d.neighbor_table(n(4)).unwrap().substitutes, vec![n(3)]);
        assert_eq!(d.rank(n(4)), Some(2));
    }

    #[test]
    fn root_only() {
        let mut g = TopologyGraph::new();
        g.add_node(n(1), NodeRole::Root).unwrap();
        let d = build_dodag(&g).unwrap();
        assert!(d.root_paths().is_empty());
        assert!(d.routing_table(n(1)).unwrap().is_empty());
    }

    #[test]
    fn chain_path() {
        let d = build_dodag(&TopologyGraph::linear(1).unwrap()).unwrap();
        assert_eq!(d.root_path(n(3)).unwrap().nodes(), ids(&[3, 2, 1]).as_slice());
    }

    #[test]
    fn tie_breaks_on_smallest_id() {
        let mut g = TopologyGraph::new();
        g.add_node(n(1), NodeRole::Root).unwrap();
        for id in [2, 3] {
            g.add_node(n(id), NodeRole::Forwarder).unwrap();
            g.add_link(n(1), n(id)).unwrap();
        }
        g.add_node(n(4), NodeRole::Source).unwrap();
        g.add_link(n(3), n(4)).unwrap();
        g.add_link(n(2), n(4)).unwrap();
        let d = build_dodag(&g).unwrap();
        assert_eq!(d.parent(n(4)), Some(n(2)));
        assert_eq!(d.neighbor_table(n(4)).unwrap().substitutes, vec![n(3)]);
    }

    #[test]
    fn build_errors() {
        let mut g = TopologyGraph::new();
        g.add_node(n(1), NodeRole::Root).unwrap();
        g.add_node(n(2), NodeRole::Source).unwrap();
        g.add_node(n(3), NodeRole::Source).unwrap();
        g.add_link(n(1), n(2)).unwrap();
        assert_eq!(build_dodag(&g).unwrap_err(), DodagError::Unreachable(vec![n(3)]));
        g.add_node(n(4), NodeRole::Root).unwrap();
        assert!(matches!(build_dodag(&g).unwrap_err(), DodagError::MultipleRoots(_)));
        assert_eq!(build_dodag(&TopologyGraph::new()).unwrap_err(), DodagError::NoRoot);
    }

    #[test]
    fn failing_3_moves_6_to_4_and_detaches_5() {
        let mut d = build_dodag(&TopologyGraph::sample()).unwrap();
        let report = d.reparent(n(3)).unwrap();
        assert_eq!(d.parent(n(6)), Some(n(4)));
        assert_eq!(d.rank(n(6)), Some(3));
        assert_eq!(report.detached, ids(&[5, 8]));
        assert!(report.reparented.contains(&(n(6), n(3), n(4))));
        assert!(d.next_hop(n(5)).is_err());
        assert_eq!(d.root_path(n(10)).unwrap().nodes(), ids(&[10, 6, 4, 2, 1]).as_slice());
        assert!(d.routing_table(n(2)).unwrap().reachable().contains(&n(10)));
    }

    #[test]
    fn removing_a_leaf_only_drops_its_routes() {
        let mut d = build_dodag(&TopologyGraph::sample()).unwrap();
        let before = d.root_paths().clone();
        d.reparent(n(9)).unwrap();
        assert!(d.root_path(n(9)).is_none());
        assert!(!d.routing_table(n(6)).unwrap().reachable().contains(&n(9)));
        for (src, path) in before {
            if src != n(9) {
                assert_eq!(d.root_path(src), Some(&path));
            }
        }
    }

    #[test]
    fn root_cannot_fail_or_forward() {
        let mut d = build_dodag(&TopologyGraph::sample()).unwrap();
        assert_eq!(d.reparent(n(1)).unwrap_err(), DodagError::IsRoot(n(1)));
        assert_eq!(d.next_hop(n(1)).unwrap_err(), DodagError::IsRoot(n(1)));
    }

    #[test]
    fn join_attaches_new_node() {
        let mut d = build_dodag(&TopologyGraph::sample()).unwrap();
        d.join(n(11), NodeRole::Source, &[n(8)]).unwrap();
        assert_eq!(d.root_path(n(11)).unwrap().nodes(), ids(&[11, 8, 5, 3, 1]).as_slice());
    }
}
