//! Threat injection: natural link loss plus a single compromised
//! forwarder that can drop, strip, forge or replay.
//!
//! All random decisions are counter-based: each is drawn from its own
//! ChaCha stream keyed by what is being decided (link, packet, node), so a
//! decision never depends on how many draws happened before it. Raising a
//! drop rate under a fixed seed therefore only adds drops.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::types::{BloomBits, DataPacket, NodeId, ProvenanceField, RInfoPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversaryConfig {
    pub malicious_node: Option<NodeId>,
    /// Per-packet drop probability at the malicious node.
    pub malicious_drop_rate: f64,
    /// Per-transmission loss probability on links without their own rate.
    pub natural_loss_rate: f64,
    pub strip_provenance: bool,
    pub forge_provenance: bool,
    /// Forger also recomputes the digest over its forgery.
    pub forge_redigest: bool,
    /// Malicious node forwards every passing packet twice.
    pub replay: bool,
    pub rng_seed: u64,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            malicious_node: None,
            malicious_drop_rate: 0.0,
            natural_loss_rate: 0.0,
            strip_provenance: false,
            forge_provenance: false,
            forge_redigest: false,
            replay: false,
            rng_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdversaryError {
    #[error("adversary.{key} = {value} is outside [0, 1]")]
    RateOutOfRange { key: &'static str, value: f64 },
    #[error("adversary.malicious_node {0} is the root, which is trusted")]
    MaliciousRoot(NodeId),
}

impl AdversaryConfig {
    pub fn validate(&self, root: NodeId) -> Result<(), AdversaryError> {
        for (key, value) in
            [("malicious_drop_rate", self.malicious_drop_rate), ("natural_loss_rate", self.natural_loss_rate)]
        {
            if !(0.0..=1.0).contains(&value) {
                return Err(AdversaryError::RateOutOfRange { key, value });
            }
        }
        if self.malicious_node == Some(root) {
            return Err(AdversaryError::MaliciousRoot(root));
        }
        Ok(())
    }
}

/// Independent decision streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Stream {
    NaturalLoss = 1,
    MaliciousDrop = 2,
    Forge = 3,
}

/// What a draw is about. Packed injectively into the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawKey {
    pub stream: Stream,
    pub copy: u8,
    pub node: NodeId,
    pub peer: Option<NodeId>,
    pub origin: NodeId,
    pub seq: u32,
}

impl DrawKey {
    fn pack(&self) -> u64 {
        (self.stream as u64) << 60
            | ((self.copy & 0x0F) as u64) << 56
            | (self.node.get() as u64) << 48
            | (self.origin.get() as u64) << 40
            | (self.peer.map_or(0, NodeId::get) as u64) << 32
            | self.seq as u64
    }
}

/// Seeded source of per-decision uniforms.
#[derive(Debug, Clone)]
pub struct DecisionRng {
    base: ChaCha8Rng,
}

impl DecisionRng {
    pub fn new(seed: u64) -> Self {
        DecisionRng { base: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn stream(&self, key: DrawKey) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(key.pack());
        rng
    }

    pub fn uniform(&self, key: DrawKey) -> f64 {
        self.stream(key).gen::<f64>()
    }

    pub fn bernoulli(&self, key: DrawKey, p: f64) -> bool {
        p > 0.0 && (p >= 1.0 || self.uniform(key) < p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkOutcome {
    Delivered,
    Lost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaliciousAction {
    Pass,
    Drop,
    Stripped,
    Forged,
}

#[derive(Debug, Clone)]
pub struct Adversary {
    config: AdversaryConfig,
    rng: DecisionRng,
}

impl Adversary {
    pub fn new(config: AdversaryConfig) -> Self {
        let rng = DecisionRng::new(config.rng_seed);
        Adversary { config, rng }
    }

    pub fn config(&self) -> &AdversaryConfig {
        &self.config
    }

    pub fn is_malicious(&self, node: NodeId) -> bool {
        self.config.malicious_node == Some(node)
    }

    /// Bernoulli loss for one transmission `from -> to` of `(origin, seq)`.
    #[allow(clippy::too_many_arguments)]
    pub fn apply_link_loss(
        &self,
        from: NodeId,
        to: NodeId,
        origin: NodeId,
        seq: u32,
        copy: u8,
        rate: f64,
    ) -> LinkOutcome {
        let key = DrawKey { stream: Stream::NaturalLoss, copy, node: from, peer: Some(to), origin, seq };
        if self.rng.bernoulli(key, rate) {
            LinkOutcome::Lost
        } else {
            LinkOutcome::Delivered
        }
    }

    /// Adversarial handling of a packet the malicious node is about to
    /// forward. `population` is the pool forged IDs are drawn from.
    pub fn apply_malicious(&self, pkt: &mut DataPacket, node: NodeId, population: &[NodeId]) -> MaliciousAction {
        if !self.is_malicious(node) {
            return MaliciousAction::Pass;
        }
        let key = |stream| DrawKey { stream, copy: 0, node, peer: None, origin: pkt.origin, seq: pkt.seq };
        if self.rng.bernoulli(key(Stream::MaliciousDrop), self.config.malicious_drop_rate) {
            return MaliciousAction::Drop;
        }
        if pkt.provenance.is_absent() {
            return MaliciousAction::Pass;
        }
        if self.config.strip_provenance {
            // The extension-header bit is left alone.
            pkt.provenance = ProvenanceField::Absent;
            return MaliciousAction::Stripped;
        }
        if self.config.forge_provenance {
            let mut rng = self.rng.stream(key(Stream::Forge));
            forge(&mut pkt.provenance, population, &mut rng);
            if self.config.forge_redigest {
                pkt.refresh_digest();
            }
            return MaliciousAction::Forged;
        }
        MaliciousAction::Pass
    }

    pub fn replays(&self, node: NodeId) -> bool {
        self.is_malicious(node) && self.config.replay
    }
}

/// Replaces the provenance with a different valid-looking value.
fn forge(field: &mut ProvenanceField, population: &[NodeId], rng: &mut impl Rng) {
    let pick = |rng: &mut dyn rand::RngCore| population[rng.gen_range(0..population.len())];
    match field {
        ProvenanceField::Pppt(pair) if population.len() >= 3 => {
            let original = *pair;
            let forged = loop {
                let candidate = RInfoPair::new(pick(rng), pick(rng));
                if candidate != original && candidate.destination != candidate.source {
                    break candidate;
                }
            };
            *pair = forged;
        }
        ProvenanceField::Pppt(pair) => std::mem::swap(&mut pair.destination, &mut pair.source),
        ProvenanceField::Pid(ids) if !ids.is_empty() => {
            // Remove a benign hop from the record.
            let i = rng.gen_range(0..ids.len());
            ids.remove(i);
        }
        ProvenanceField::Pid(ids) => ids.push(pick(rng)),
        ProvenanceField::Bloom(bits) => {
            let i = rng.gen_range(0..BloomBits::BITS);
            bits.0[i / 8] ^= 1 << (i % 8);
        }
        ProvenanceField::Absent => {}
    }
}
