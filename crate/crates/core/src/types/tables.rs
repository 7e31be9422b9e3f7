use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{NodeId, TypeError};

/// Routing entry for one next-hop child, annotated with the sequence
/// numbers seen through it.
///
/// `seq_history` is keyed by `(origin, seq)` so that an aggregator with
/// several sources behind the same child can still tell packets apart.
/// Each origin keeps at most `capacity` sequence numbers; the oldest is
/// evicted first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingEntry {
    pub child: NodeId,
    /// Destinations reachable through `child` (storing mode).
    pub destinations: BTreeSet<NodeId>,
    pub last_seq: Option<u32>,
    seq_history: BTreeMap<NodeId, BTreeMap<u32, u32>>,
    capacity: usize,
}

impl RoutingEntry {
    pub fn new(child: NodeId, capacity: usize) -> Self {
        RoutingEntry {
            child,
            destinations: BTreeSet::from([child]),
            last_seq: None,
            seq_history: BTreeMap::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn record(&mut self, origin: NodeId, seq: u32) {
        self.last_seq = Some(seq);
        let flow = self.seq_history.entry(origin).or_default();
        *flow.entry(seq).or_insert(0) += 1;
        while flow.len() > self.capacity {
            flow.pop_first();
        }
    }

    pub fn has_seen(&self, origin: NodeId, seq: u32) -> bool {
        self.observations(origin, seq) > 0
    }

    pub fn observations(&self, origin: NodeId, seq: u32) -> u32 {
        self.seq_history.get(&origin).and_then(|f| f.get(&seq)).copied().unwrap_or(0)
    }

    /// Number of sequence numbers currently held for `origin`.
    pub fn history_len(&self, origin: NodeId) -> usize {
        self.seq_history.get(&origin).map_or(0, BTreeMap::len)
    }

    pub fn history_is_empty(&self) -> bool {
        self.seq_history.values().all(BTreeMap::is_empty)
    }

    pub fn history(&self) -> impl Iterator<Item = (NodeId, u32, u32)> + '_ {
        self.seq_history.iter().flat_map(|(origin, flow)| flow.iter().map(move |(seq, count)| (*origin, *seq, *count)))
    }

    pub fn clear_history(&mut self) {
        self.seq_history.clear();
    }
}

/// Storing-mode routing table: one entry per next-hop child.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingTable {
    pub owner: NodeId,
    entries: BTreeMap<NodeId, RoutingEntry>,
}

impl RoutingTable {
    pub fn new(owner: NodeId) -> Self {
        RoutingTable { owner, entries: BTreeMap::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &RoutingEntry> {
        self.entries.values()
    }

    pub fn entry(&self, child: NodeId) -> Option<&RoutingEntry> {
        self.entries.get(&child)
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.keys().copied()
    }

    /// Every destination reachable below the owner.
    pub fn reachable(&self) -> BTreeSet<NodeId> {
        self.entries.values().flat_map(|e| e.destinations.iter().copied()).collect()
    }

    pub(crate) fn insert_entry(&mut self, entry: RoutingEntry) {
        self.entries.insert(entry.child, entry);
    }

    pub(crate) fn entry_mut_or_insert(&mut self, child: NodeId, capacity: usize) -> &mut RoutingEntry {
        self.entries.entry(child).or_insert_with(|| RoutingEntry::new(child, capacity))
    }

    pub(crate) fn take_entries(&mut self) -> BTreeMap<NodeId, RoutingEntry> {
        std::mem::take(&mut self.entries)
    }

    /// Node-level provenance: pin `(origin, seq)` to the entry of the child
    /// the packet arrived from.
    pub fn record(&mut self, child: NodeId, origin: NodeId, seq: u32) -> Result<(), TypeError> {
        let owner = self.owner;
        let entry = self.entries.get_mut(&child).ok_or(TypeError::UnknownChildRoute { owner, child })?;
        entry.record(origin, seq);
        Ok(())
    }

    /// Children whose history holds `(origin, seq)`.
    pub fn children_recording(&self, origin: NodeId, seq: u32) -> Vec<NodeId> {
        self.entries.values().filter(|e| e.has_seen(origin, seq)).map(|e| e.child).collect()
    }

    pub fn has_seen(&self, origin: NodeId, seq: u32) -> bool {
        self.entries.values().any(|e| e.has_seen(origin, seq))
    }

    /// Clears sequence histories, keeping `last_seq`. Returns how many
    /// entries held history.
    pub fn reset_histories(&mut self) -> usize {
        let mut cleared = 0;
        for entry in self.entries.values_mut() {
            if !entry.history_is_empty() {
                cleared += 1;
            }
            entry.clear_history();
        }
        cleared
    }
}

/// Neighbor table: preferred parent, substitute parents and all link
/// neighbors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborTable {
    pub owner: NodeId,
    pub parent: Option<NodeId>,
    pub substitutes: Vec<NodeId>,
    pub neighbors: Vec<NodeId>,
}

impl NeighborTable {
    pub fn new(owner: NodeId) -> Self {
        NeighborTable { owner, parent: None, substitutes: Vec::new(), neighbors: Vec::new() }
    }
}
