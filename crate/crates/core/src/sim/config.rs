//! Scenario description, parsed from TOML and validated before a run.

use serde::{Deserialize, Deserializer, Serialize};

use crate::adversary::{AdversaryConfig, AdversaryError};
use crate::codec::{Scheme, DEFAULT_PID_CAPACITY};
use crate::dodag::{DodagError, DEFAULT_INTERVAL};
use crate::topology::TopologyGraph;
use crate::types::{NodeId, NodeRole, DEFAULT_PAYLOAD_BYTES};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{key}: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("topology: {0}")]
    Topology(#[from] DodagError),
    #[error("adversary: {0}")]
    Adversary(#[from] AdversaryError),
}

impl ConfigError {
    fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { key, reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    /// Root, `forwarders` relays, one source.
    Linear {
        forwarders: u8,
    },
    /// The ten-node sample DODAG.
    Sample,
    /// Disjoint chains under the root, one source per chain.
    Branches {
        branches: u8,
        depth: u8,
    },
    Graph {
        nodes: Vec<NodeSpec>,
        links: Vec<LinkSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: NodeId,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub a: NodeId,
    pub b: NodeId,
    /// Overrides the natural loss rate on this link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
}

impl TopologySpec {
    pub fn build(&self) -> Result<TopologyGraph, DodagError> {
        match self {
            TopologySpec::Linear { forwarders } => TopologyGraph::linear(*forwarders),
            TopologySpec::Sample => Ok(TopologyGraph::sample()),
            TopologySpec::Branches { branches, depth } => TopologyGraph::branches(*branches, *depth),
            TopologySpec::Graph { nodes, links } => {
                let mut g = TopologyGraph::new();
                for n in nodes {
                    g.add_node(n.id, n.role)?;
                }
                for l in links {
                    g.add_link_with_loss(l.a, l.b, l.loss)?;
                }
                Ok(g)
            }
        }
    }
}

/// Radio and MCU cost model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    /// MAC plus compressed IPv6/UDP header bytes on air.
    pub header_bytes: usize,
    pub bitrate_bps: u32,
    /// Extra sender radio-on time per frame when duty cycling (wake-up
    /// strobing).
    pub mac_delay_ticks: u64,
    /// Fraction of idle time the radio listens when duty cycling.
    pub idle_listen_fraction: f64,
    /// MCU ticks for one provenance encode step.
    pub cpu_encode_ticks: u64,
    /// MCU ticks for plain forwarding work.
    pub cpu_forward_ticks: u64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            header_bytes: 25,
            bitrate_bps: 250_000,
            mac_delay_ticks: 2048,
            idle_listen_fraction: 0.01,
            cpu_encode_ticks: 50,
            cpu_forward_ticks: 20,
        }
    }
}

/// What `natural_loss_rate` refers to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossScope {
    /// Each transmission is lost with the given rate.
    #[default]
    Link,
    /// The rate is the end-to-end loss of a packet's path; each hop gets the
    /// per-hop share that compounds to it.
    Path,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Failure {
    pub node: NodeId,
    pub at_s: f64,
}

/// A node that silently discards one specific packet after receiving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedDrop {
    pub node: NodeId,
    pub origin: NodeId,
    pub seq: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub topology: TopologySpec,
    /// Empty means every node with the source role.
    #[serde(default)]
    pub sources: Vec<NodeId>,
    #[serde(default = "default_interval")]
    pub packet_interval_s: f64,
    #[serde(default = "default_payload")]
    pub payload_bytes: usize,
    #[serde(default = "default_duration")]
    pub sim_duration_s: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_true", deserialize_with = "on_off")]
    pub duty_cycling: bool,
    #[serde(rename = "interval_I", default = "default_round")]
    pub interval_i: u32,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default)]
    pub radio: RadioConfig,
    #[serde(default)]
    pub natural_loss_scope: LossScope,
    #[serde(default)]
    pub failures: Vec<Failure>,
    #[serde(default)]
    pub scripted_drops: Vec<ScriptedDrop>,
    #[serde(default = "default_pid_capacity")]
    pub pid_capacity: usize,
}

fn default_name() -> String {
    "scenario".into()
}
fn default_interval() -> f64 {
    10.0
}
fn default_payload() -> usize {
    DEFAULT_PAYLOAD_BYTES
}
fn default_duration() -> f64 {
    600.0
}
fn default_true() -> bool {
    true
}
fn default_round() -> u32 {
    DEFAULT_INTERVAL as u32
}
fn default_pid_capacity() -> usize {
    DEFAULT_PID_CAPACITY
}

/// Accepts `true`/`false` as well as `"on"`/`"off"`.
fn on_off<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Word(String),
    }
    match Flag::deserialize(d)? {
        Flag::Bool(b) => Ok(b),
        Flag::Word(w) => match w.as_str() {
            "on" => Ok(true),
            "off" => Ok(false),
            other => Err(serde::de::Error::custom(format!("duty_cycling: expected on/off, got {other:?}"))),
        },
    }
}

impl ScenarioConfig {
    /// A scenario with defaults everywhere but the topology.
    pub fn new(topology: TopologySpec) -> Self {
        ScenarioConfig {
            name: default_name(),
            topology,
            sources: Vec::new(),
            packet_interval_s: default_interval(),
            payload_bytes: default_payload(),
            sim_duration_s: default_duration(),
            scheme: Scheme::default(),
            duty_cycling: true,
            interval_i: default_round(),
            adversary: AdversaryConfig::default(),
            radio: RadioConfig::default(),
            natural_loss_scope: LossScope::default(),
            failures: Vec::new(),
            scripted_drops: Vec::new(),
            pid_capacity: default_pid_capacity(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// Sources in ascending id order, after applying the role default.
    pub fn resolved_sources(&self, g: &TopologyGraph) -> Vec<NodeId> {
        let mut s = if self.sources.is_empty() { g.sources() } else { self.sources.clone() };
        s.sort();
        s.dedup();
        s
    }

    /// Checks everything that can be checked without running, and returns
    /// the built topology.
    pub fn validate(&self) -> Result<TopologyGraph, ConfigError> {
        let positive = |key, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, format!("must be positive, got {v}")))
            }
        };
        positive("sim_duration_s", self.sim_duration_s)?;
        positive("packet_interval_s", self.packet_interval_s)?;
        if self.interval_i == 0 {
            return Err(ConfigError::invalid("interval_I", "must be at least 1"));
        }
        if self.pid_capacity == 0 {
            return Err(ConfigError::invalid("pid_capacity", "must be at least 1"));
        }
        if self.radio.bitrate_bps == 0 {
            return Err(ConfigError::invalid("radio.bitrate_bps", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.radio.idle_listen_fraction) {
            return Err(ConfigError::invalid("radio.idle_listen_fraction", "must be within [0, 1]"));
        }

        let g = self.topology.build()?;
        let root = g.root()?;
        for (a, b, loss) in g.links() {
            if let Some(l) = loss {
                if !(0.0..=1.0).contains(&l) {
                    return Err(ConfigError::invalid("topology.links", format!("loss {l} on {a}-{b} outside [0, 1]")));
                }
            }
        }
        let sources = self.resolved_sources(&g);
        if sources.is_empty() && self.scheme != Scheme::None {
            return Err(ConfigError::invalid("sources", "no source nodes"));
        }
        for s in &sources {
            if g.role(*s) != Some(NodeRole::Source) {
                return Err(ConfigError::invalid("sources", format!("node {s} is not a source in the topology")));
            }
        }
        self.adversary.validate(root)?;
        if let Some(m) = self.adversary.malicious_node {
            if g.role(m).is_none() {
                return Err(ConfigError::invalid("adversary.malicious_node", format!("unknown node {m}")));
            }
        }
        for f in &self.failures {
            if g.role(f.node).is_none() || f.node == root {
                return Err(ConfigError::invalid("failures", format!("node {} cannot fail", f.node)));
            }
            if !(f.at_s.is_finite() && f.at_s >= 0.0) {
                return Err(ConfigError::invalid("failures", format!("bad time {}", f.at_s)));
            }
        }
        for d in &self.scripted_drops {
            if g.role(d.node).is_none() || d.node == root {
                return Err(ConfigError::invalid("scripted_drops", format!("node {} cannot drop", d.node)));
            }
        }
        Ok(g)
    }
}
