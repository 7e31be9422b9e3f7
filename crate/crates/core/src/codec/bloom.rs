//! In-packet Bloom filter baseline: 144 bits, four hash functions.
//!
//! Indices come from double hashing over SHA-256 of the node ID:
//! `h_i = (a + i * b) mod 144` with `a`, `b` taken from the first 16
//! digest bytes (`b` forced odd).

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::types::{compute_digest, BloomBits, DataPacket, NodeId, ProvenanceField, ProvenanceKind};

use super::{finish_update, CodecError, DecodeError};

pub const BLOOM_HASHES: usize = 4;

fn index_table() -> &'static [[u8; BLOOM_HASHES]; 256] {
    static TABLE: OnceLock<[[u8; BLOOM_HASHES]; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [[0u8; BLOOM_HASHES]; 256];
        for (id, row) in table.iter_mut().enumerate() {
            let d = compute_digest(&[id as u8]).0;
            let a = u64::from_le_bytes(d[0..8].try_into().unwrap());
            let b = u64::from_le_bytes(d[8..16].try_into().unwrap()) | 1;
            for (i, slot) in row.iter_mut().enumerate() {
                let h = a.wrapping_add((i as u64).wrapping_mul(b)) % BloomBits::BITS as u64;
                *slot = h as u8;
            }
        }
        table
    })
}

/// Thin view over [`BloomBits`] with set semantics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BloomFilter(pub BloomBits);

impl BloomFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn indices(id: NodeId) -> [u8; BLOOM_HASHES] {
        index_table()[id.get() as usize]
    }

    pub fn insert(&mut self, id: NodeId) {
        for i in Self::indices(id) {
            self.0.set_bit(i as usize);
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        Self::indices(id).iter().all(|i| self.0.bit(*i as usize))
    }

    /// `(1 - e^{-kn/m})^k`
    pub fn theoretical_fpr(inserted: usize) -> f64 {
        let (k, m) = (BLOOM_HASHES as f64, BloomBits::BITS as f64);
        (1.0 - (-k * inserted as f64 / m).exp()).powf(k)
    }
}

pub fn bf_encode(pkt: &mut DataPacket, node: NodeId) -> Result<(), CodecError> {
    let at_origin = node == pkt.origin;
    let intact = at_origin || pkt.digest_matches();
    let mut filter = match pkt.provenance {
        ProvenanceField::Absent if at_origin => BloomFilter::new(),
        ProvenanceField::Absent => return Ok(()),
        ProvenanceField::Bloom(bits) => BloomFilter(bits),
        ref other => return Err(CodecError::WrongScheme { expected: ProvenanceKind::Bloom, found: other.kind() }),
    };
    filter.insert(node);
    pkt.provenance = ProvenanceField::Bloom(filter.0);
    if at_origin {
        pkt.eh_prov_flag = true;
    }
    finish_update(pkt, intact);
    Ok(())
}

/// Candidates testing positive. A superset of the nodes that inserted
/// themselves; carries no order.
pub fn bf_decode(
    pkt: &DataPacket,
    candidates: impl IntoIterator<Item = NodeId>,
) -> Result<BTreeSet<NodeId>, DecodeError> {
    let filter = match pkt.provenance {
        ProvenanceField::Bloom(bits) => BloomFilter(bits),
        ProvenanceField::Absent => return Err(DecodeError::MissingProvenance),
        _ => return Err(DecodeError::WrongScheme { expected: ProvenanceKind::Bloom }),
    };
    Ok(candidates.into_iter().filter(|c| filter.contains(*c)).collect())
}
