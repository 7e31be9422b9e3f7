use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::{NodeId, TypeError};

/// Serialized size of the routing-pair provenance.
pub const PPPT_SIZE: usize = 2;
/// Serialized size of the in-packet Bloom filter (144 bits).
pub const BLOOM_SIZE: usize = 18;
pub const DIGEST_SIZE: usize = 32;

/// `⟨destination, source⟩` routing pair rewritten at every hop.
///
/// `destination` is the preferred parent the packet is being sent to and
/// `source` is the node currently sending it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RInfoPair {
    pub destination: NodeId,
    pub source: NodeId,
}

impl RInfoPair {
    pub const fn new(destination: NodeId, source: NodeId) -> Self {
        RInfoPair { destination, source }
    }
}

impl fmt::Display for RInfoPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.destination, self.source)
    }
}

/// Fixed 144-bit Bloom filter array carried in the packet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct BloomBits(pub [u8; BLOOM_SIZE]);

impl BloomBits {
    pub const BITS: usize = BLOOM_SIZE * 8;

    pub fn bit(&self, index: usize) -> bool {
        self.0[index / 8] & (1 << (index % 8)) != 0
    }

    pub fn set_bit(&mut self, index: usize) {
        self.0[index / 8] |= 1 << (index % 8);
    }

    pub fn count_ones(&self) -> u32 {
        self.0.iter().map(|b| b.count_ones()).sum()
    }
}

/// Which provenance encoding a byte string belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProvenanceKind {
    Pppt,
    Pid,
    Bloom,
}

/// Scheme-dependent provenance carried in a data packet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum ProvenanceField {
    Pppt(RInfoPair),
    Pid(Vec<NodeId>),
    Bloom(BloomBits),
    #[default]
    Absent,
}

impl ProvenanceField {
    pub fn kind(&self) -> Option<ProvenanceKind> {
        match self {
            ProvenanceField::Pppt(_) => Some(ProvenanceKind::Pppt),
            ProvenanceField::Pid(_) => Some(ProvenanceKind::Pid),
            ProvenanceField::Bloom(_) => Some(ProvenanceKind::Bloom),
            ProvenanceField::Absent => None,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, ProvenanceField::Absent)
    }

    /// Bytes this field occupies on the air; `0` when absent.
    pub fn wire_len(&self) -> usize {
        match self {
            ProvenanceField::Pppt(_) => PPPT_SIZE,
            ProvenanceField::Pid(ids) => ids.len(),
            ProvenanceField::Bloom(_) => BLOOM_SIZE,
            ProvenanceField::Absent => 0,
        }
    }
}

/// Canonical byte layout of a provenance field.
///
/// * PPPT: `[destination, source]`
/// * PID: node IDs in recording order, one byte each
/// * Bloom: the 18 filter bytes
pub fn serialize_provenance(field: &ProvenanceField) -> Result<Vec<u8>, TypeError> {
    match field {
        ProvenanceField::Pppt(pair) => Ok(vec![pair.destination.get(), pair.source.get()]),
        ProvenanceField::Pid(ids) => Ok(ids.iter().map(|id| id.get()).collect()),
        ProvenanceField::Bloom(bits) => Ok(bits.0.to_vec()),
        ProvenanceField::Absent => Err(TypeError::NoProvenance),
    }
}

pub fn deserialize_provenance(kind: ProvenanceKind, bytes: &[u8]) -> Result<ProvenanceField, TypeError> {
    match kind {
        ProvenanceKind::Pppt => {
            let [destination, source] = bytes else {
                return Err(TypeError::BadLength { kind, expected: PPPT_SIZE, actual: bytes.len() });
            };
            Ok(ProvenanceField::Pppt(RInfoPair::new(NodeId::new(*destination)?, NodeId::new(*source)?)))
        }
        ProvenanceKind::Pid => {
            let ids = bytes.iter().map(|b| NodeId::new(*b)).collect::<Result<Vec<_>, _>>()?;
            Ok(ProvenanceField::Pid(ids))
        }
        ProvenanceKind::Bloom => {
            let bits: [u8; BLOOM_SIZE] = bytes.try_into().map_err(|_| TypeError::BadLength {
                kind,
                expected: BLOOM_SIZE,
                actual: bytes.len(),
            })?;
            Ok(ProvenanceField::Bloom(BloomBits(bits)))
        }
    }
}

/// SHA-256 message digest over serialized provenance.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub [u8; DIGEST_SIZE]);

impl Digest {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, TypeError> {
        let bytes = hex::decode(s).map_err(|_| TypeError::BadDigest)?;
        let arr: [u8; DIGEST_SIZE] = bytes.try_into().map_err(|_| TypeError::BadDigest)?;
        Ok(Digest(arr))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &self.to_hex()[..16])
    }
}

pub fn compute_digest(field_bytes: &[u8]) -> Digest {
    Digest(Sha256::digest(field_bytes).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(id: u8) -> NodeId {
        NodeId::from_raw(id)
    }

    #[test]
    fn pppt_layout_is_destination_then_source() {
        let field = ProvenanceField::Pppt(RInfoPair::new(n(6), n(10)));
        assert_eq!(serialize_provenance(&field).unwrap(), vec![0x06, 0x0A]);
    }

    #[test]
    fn pid_is_one_byte_per_recorded_node() {
        let field = ProvenanceField::Pid(vec![n(10), n(6), n(3), n(1)]);
        assert_eq!(serialize_provenance(&field).unwrap().len(), 4);
    }

    #[test]
    fn bloom_is_always_18_bytes() {
        let mut bits = BloomBits::default();
        assert_eq!(serialize_provenance(&ProvenanceField::Bloom(bits)).unwrap().len(), 18);
        bits.set_bit(143);
        assert_eq!(serialize_provenance(&ProvenanceField::Bloom(bits)).unwrap().len(), 18);
    }

    #[test]
    fn absent_cannot_be_serialized() {
        let err = serialize_provenance(&ProvenanceField::Absent).unwrap_err();
        assert_eq!(err.to_string(), "no provenance to serialize");
    }

    #[test]
    fn deserialize_rejects_wrong_lengths_and_zero_ids() {
        assert!(deserialize_provenance(ProvenanceKind::Pppt, &[1, 2, 3]).is_err());
        assert!(deserialize_provenance(ProvenanceKind::Bloom, &[0; 17]).is_err());
        assert!(deserialize_provenance(ProvenanceKind::Pppt, &[0, 2]).is_err());
    }

    #[test]
    fn sha256_empty_vector() {
        assert_eq!(compute_digest(&[]).to_hex(), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn digest_is_deterministic_and_order_sensitive() {
        assert_eq!(compute_digest(&[6, 10]), compute_digest(&[6, 10]));
        // Values from an independent SHA-256 (python hashlib).
        assert_eq!(
            compute_digest(&[0x06, 0x0A]).to_hex(),
            "51b05cecae8a29507731d3050b0c83eb04513a00327e1ff775ee60aaae6388c0"
        );
        assert_eq!(
            compute_digest(&[0x0A, 0x06]).to_hex(),
            "7306c1520838bd3b312946c607711f75b3f56add76189f7a1d6a280c021d6800"
        );
        assert_ne!(compute_digest(&[0x06, 0x0A]), compute_digest(&[0x0A, 0x06]));
    }
}
