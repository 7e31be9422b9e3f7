//! Provenance codecs: the routing-pair scheme and the PID / Bloom
//! baselines, plus the root-side assessment that ties them together.

pub mod bloom;
pub mod pid;
pub mod pppt;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dodag::{Dodag, DodagError};
use crate::types::{DataPacket, NodeId, PathTrace, ProvenanceKind, TypeError};

pub use bloom::{bf_decode, bf_encode, BloomFilter, BLOOM_HASHES};
pub use pid::{pid_decode, pid_encode, DEFAULT_PID_CAPACITY};
pub use pppt::{
    check_eh_flag, decode, decode_with_oracle, encode_at_forwarder, encode_at_source, receive_at_root, reset_interval,
    RtOracle,
};

/// Provenance scheme a scenario runs under. `None` is plain RPL.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Pppt,
    Pid,
    Bf,
    None,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Pppt, Scheme::Pid, Scheme::Bf, Scheme::None];

    pub fn provenance_kind(self) -> Option<ProvenanceKind> {
        match self {
            Scheme::Pppt => Some(ProvenanceKind::Pppt),
            Scheme::Pid => Some(ProvenanceKind::Pid),
            Scheme::Bf => Some(ProvenanceKind::Bloom),
            Scheme::None => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Pppt => "pppt",
            Scheme::Pid => "pid",
            Scheme::Bf => "bf",
            Scheme::None => "none",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.as_str() == s)
            .ok_or_else(|| format!("unknown scheme `{s}` (expected pppt, pid, bf or none)"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("node {0} is not a source")]
    NotASource(NodeId),
    #[error("packet originated at {origin}, not at {node}")]
    OriginMismatch { node: NodeId, origin: NodeId },
    #[error("no preferred parent at node {0}")]
    NoPreferredParent(NodeId),
    #[error("unknown child route {child} at node {node}")]
    UnknownChildRoute { node: NodeId, child: NodeId },
    #[error("root {0} does not encode provenance")]
    RootEncode(NodeId),
    #[error("expected {expected:?} provenance, found {found:?}")]
    WrongScheme { expected: ProvenanceKind, found: Option<ProvenanceKind> },
    #[error("PID list overflow: capacity {capacity} entries")]
    PidOverflow { capacity: usize },
    #[error(transparent)]
    Dodag(#[from] DodagError),
}

impl From<TypeError> for CodecError {
    fn from(e: TypeError) -> Self {
        match e {
            TypeError::UnknownChildRoute { owner, child } => CodecError::UnknownChildRoute { node: owner, child },
            other => unreachable!("routing table only reports unknown routes: {other}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("provenance forged")]
    Forged,
    #[error("provenance missing")]
    MissingProvenance,
    #[error("expected {expected:?} provenance")]
    WrongScheme { expected: ProvenanceKind },
    #[error("provenance not addressed to root (destination {destination})")]
    NotAddressedToRoot { destination: NodeId },
    #[error("trace broken at node {at}")]
    TraceBroken { at: NodeId },
    #[error("ambiguous trace at node {at}")]
    Ambiguous { at: NodeId },
    #[error("empty PID list")]
    EmptyPid,
}

/// Reconstructed path plus whether it agrees with the root's own path
/// knowledge for the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub trace: PathTrace,
    pub verified: bool,
}

/// Why the root discarded a packet before decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    ProvenanceStripped,
    UnflaggedPacket,
}

impl fmt::Display for DiscardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiscardReason::ProvenanceStripped => "provenance stripped",
            DiscardReason::UnflaggedPacket => "unflagged packet",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagCheck {
    Accept,
    Discard(DiscardReason),
}

/// Final judgement of the root on one arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    /// Decoded, but the trace disagrees with the root's path knowledge.
    PathMismatch,
    Stripped,
    Unflagged,
    Forged,
    TraceBroken {
        at: NodeId,
    },
    Ambiguous {
        at: NodeId,
    },
    Misaddressed,
    Malformed,
    /// Second arrival of an `(origin, seq)` already seen.
    Duplicate,
    /// No provenance scheme in use; accepted as-is.
    Accepted,
}

impl Verdict {
    pub fn is_verified(self) -> bool {
        matches!(self, Verdict::Verified)
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::PathMismatch => "path mismatch",
            Verdict::Stripped => "provenance stripped",
            Verdict::Unflagged => "unflagged packet",
            Verdict::Forged => "provenance forged",
            Verdict::TraceBroken { .. } => "trace broken",
            Verdict::Ambiguous { .. } => "ambiguous trace",
            Verdict::Misaddressed => "misaddressed",
            Verdict::Malformed => "malformed",
            Verdict::Duplicate => "duplicate",
            Verdict::Accepted => "accepted",
        }
    }
}

impl From<DecodeError> for Verdict {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::Forged => Verdict::Forged,
            DecodeError::MissingProvenance => Verdict::Stripped,
            DecodeError::WrongScheme { .. } | DecodeError::EmptyPid => Verdict::Malformed,
            DecodeError::NotAddressedToRoot { .. } => Verdict::Misaddressed,
            DecodeError::TraceBroken { at } => Verdict::TraceBroken { at },
            DecodeError::Ambiguous { at } => Verdict::Ambiguous { at },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub verdict: Verdict,
    pub trace: Option<PathTrace>,
}

/// Root-side pipeline: flag fast path, digest, then scheme decode.
///
/// For the routing-pair scheme the arrival must already be recorded in the
/// root's routing table (see [`receive_at_root`]).
pub fn assess(pkt: &DataPacket, scheme: Scheme, dodag: &Dodag) -> Assessment {
    let reject = |verdict| Assessment { verdict, trace: None };
    if scheme == Scheme::None {
        return Assessment { verdict: Verdict::Accepted, trace: None };
    }
    if let FlagCheck::Discard(reason) = check_eh_flag(pkt) {
        return reject(match reason {
            DiscardReason::ProvenanceStripped => Verdict::Stripped,
            DiscardReason::UnflaggedPacket => Verdict::Unflagged,
        });
    }
    if !pkt.digest_matches() {
        return reject(Verdict::Forged);
    }
    let decoded = match scheme {
        Scheme::Pppt => decode(pkt, dodag),
        Scheme::Pid => pid_decode(pkt, dodag),
        Scheme::Bf => bf_decode(pkt, dodag.nodes()).map(|positives| {
            let expected = dodag.root_path(pkt.origin);
            let verified = expected
                .is_some_and(|path| path.nodes().iter().filter(|n| **n != dodag.root()).all(|n| positives.contains(n)));
            Decoded { trace: PathTrace(positives.into_iter().collect()), verified }
        }),
        Scheme::None => unreachable!(),
    };
    match decoded {
        Ok(Decoded { trace, verified: true }) => Assessment { verdict: Verdict::Verified, trace: Some(trace) },
        Ok(Decoded { trace, verified: false }) => Assessment { verdict: Verdict::PathMismatch, trace: Some(trace) },
        Err(e) => reject(e.into()),
    }
}

/// Applies one hop of the scheme's encoding at `node`. `from_child` is
/// `None` at the origin.
pub fn encode_hop(
    scheme: Scheme,
    pkt: &mut DataPacket,
    node: NodeId,
    from_child: Option<NodeId>,
    dodag: &mut Dodag,
    pid_capacity: usize,
) -> Result<(), CodecError> {
    match (scheme, from_child) {
        (Scheme::None, _) => Ok(()),
        (Scheme::Pppt, None) => encode_at_source(pkt, node, dodag),
        (Scheme::Pppt, Some(child)) => encode_at_forwarder(pkt, node, child, dodag),
        (Scheme::Pid, _) => pid_encode(pkt, node, dodag, pid_capacity),
        (Scheme::Bf, _) => bf_encode(pkt, node),
    }
}

/// Shared tail of every encode step: a packet whose digest already failed
/// keeps its stale digest so the root still sees the tampering.
pub(crate) fn finish_update(pkt: &mut DataPacket, intact: bool) {
    if intact {
        pkt.refresh_digest();
    }
}
