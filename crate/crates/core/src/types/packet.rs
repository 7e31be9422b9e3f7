use super::provenance::{compute_digest, serialize_provenance, Digest, ProvenanceField};
use super::NodeId;

/// Default application payload, excluding headers.
pub const DEFAULT_PAYLOAD_BYTES: usize = 200;
/// Sequence number width on the air.
pub const SEQ_BYTES: usize = 4;

/// A data packet travelling upward to the root.
///
/// The digest covers only the serialized provenance field. It is carried
/// alongside the provenance but is not counted as provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPacket {
    pub seq: u32,
    pub origin: NodeId,
    pub payload_len: usize,
    pub provenance: ProvenanceField,
    pub digest: Digest,
    /// Reserved extension-header bit: provenance was embedded at the origin.
    pub eh_prov_flag: bool,
}

impl DataPacket {
    pub fn new(origin: NodeId, seq: u32, payload_len: usize) -> Self {
        DataPacket {
            seq,
            origin,
            payload_len,
            provenance: ProvenanceField::Absent,
            digest: compute_digest(&[]),
            eh_prov_flag: false,
        }
    }

    /// Serialized provenance, empty when absent.
    pub fn provenance_bytes(&self) -> Vec<u8> {
        serialize_provenance(&self.provenance).unwrap_or_default()
    }

    pub fn expected_digest(&self) -> Digest {
        compute_digest(&self.provenance_bytes())
    }

    pub fn refresh_digest(&mut self) {
        self.digest = self.expected_digest();
    }

    pub fn digest_matches(&self) -> bool {
        self.digest == self.expected_digest()
    }

    /// Bytes on the air: payload, sequence number, provenance and, when
    /// provenance is in use, the digest.
    pub fn frame_bytes(&self, header_bytes: usize) -> usize {
        let digest = if self.eh_prov_flag { super::provenance::DIGEST_SIZE } else { 0 };
        header_bytes + self.payload_len + SEQ_BYTES + self.provenance.wire_len() + digest
    }
}
