//! The discrete-event loop.

use std::collections::{BTreeMap, BTreeSet};

use super::config::{ConfigError, LossScope, ScenarioConfig};
use super::energy::{EnergyError, EnergyLedger, IdleModel};
use super::log::{Event, EventLog, EventSink, LogHasher, LogRecord};
use crate::adversary::{Adversary, LinkOutcome, MaliciousAction};
use crate::codec::{assess, encode_hop, receive_at_root, reset_interval, Scheme, Verdict};
use crate::dodag::Dodag;
use crate::metrics::{detect_drops, Localization, RootView};
use crate::types::{DataPacket, NodeId, PathTrace, ProvenanceField, SimTime, TICKS_PER_SECOND};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// One arrival at the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub time: SimTime,
    pub origin: NodeId,
    pub seq: u32,
    pub provenance: ProvenanceField,
    pub provenance_bytes: usize,
    pub verdict: Verdict,
    pub trace: Option<PathTrace>,
}

/// Everything a run produces besides the log.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub ledger: EnergyLedger,
    pub deliveries: Vec<Delivery>,
    /// Routing state when the run ended.
    pub dodag: Dodag,
    pub generated: u64,
    pub total_ticks: u64,
}

impl RunResult {
    /// Distinct `(origin, seq)` pairs that reached the root.
    pub fn unique_delivered(&self) -> usize {
        self.deliveries.iter().filter(|d| d.verdict != Verdict::Duplicate).count()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub log: EventLog,
    pub log_hash: String,
    pub result: RunResult,
}

/// Runs a scenario and keeps the full log.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    let mut sinks = (EventLog::default(), LogHasher::default());
    let result = run_with_sink(cfg, &mut sinks)?;
    let (log, hasher) = sinks;
    Ok(RunOutput { config: cfg.clone(), log, log_hash: hasher.finish(), result })
}

/// Runs a scenario, streaming records into `sink`. The config is fully
/// validated before the first record.
pub fn run_with_sink(cfg: &ScenarioConfig, sink: &mut dyn EventSink) -> Result<RunResult, SimError> {
    let graph = cfg.validate()?;
    let dodag = Dodag::build(&graph, cfg.interval_i as usize).map_err(ConfigError::from)?;
    let mut engine = Engine::new(cfg, dodag, sink);
    engine.schedule_initial();
    engine.run_loop();
    engine.finish()
}

#[derive(Debug)]
enum Action {
    Generate { source: NodeId, seq: u32 },
    Send { node: NodeId, pkt: DataPacket, copy: u8, screened: bool },
    Arrive { node: NodeId, from: NodeId, pkt: DataPacket, copy: u8 },
    Boundary { round: u32 },
    Fail { node: NodeId },
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    dodag: Dodag,
    adversary: Adversary,
    ledger: EnergyLedger,
    sink: &'a mut dyn EventSink,
    queue: BTreeMap<(u64, u64), Action>,
    order: u64,
    emitted: u64,
    now: u64,
    duration_ticks: u64,
    interval_ticks: u64,
    population: Vec<NodeId>,
    scripted: BTreeSet<(NodeId, NodeId, u32)>,
    arrived: BTreeSet<(NodeId, u32)>,
    round: u32,
    window: BTreeMap<NodeId, BTreeSet<u32>>,
    deliveries: Vec<Delivery>,
    generated: u64,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a ScenarioConfig, dodag: Dodag, sink: &'a mut dyn EventSink) -> Self {
        let population: Vec<NodeId> = dodag.graph().node_ids().collect();
        Engine {
            cfg,
            adversary: Adversary::new(cfg.adversary.clone()),
            ledger: EnergyLedger::new(population.iter().copied()),
            sink,
            queue: BTreeMap::new(),
            order: 0,
            emitted: 0,
            now: 0,
            duration_ticks: SimTime::from_secs_f64(cfg.sim_duration_s).ticks(),
            interval_ticks: SimTime::from_secs_f64(cfg.packet_interval_s).ticks().max(1),
            population,
            scripted: cfg.scripted_drops.iter().map(|d| (d.node, d.origin, d.seq)).collect(),
            arrived: BTreeSet::new(),
            round: 1,
            window: BTreeMap::new(),
            deliveries: Vec::new(),
            generated: 0,
            dodag,
        }
    }

    fn schedule(&mut self, at: u64, action: Action) {
        self.queue.insert((at, self.order), action);
        self.order += 1;
    }

    fn emit(&mut self, record: LogRecord) {
        self.emitted += 1;
        self.sink.emit(&record);
    }

    fn schedule_initial(&mut self) {
        self.emit(LogRecord::new(
            0,
            Event::Header { version: VERSION.to_string(), config: Box::new(self.cfg.clone()) },
        ));
        let sources = self.cfg.resolved_sources(self.dodag.graph());
        if self.cfg.scheme != Scheme::None || !sources.is_empty() {
            for s in sources {
                self.schedule(0, Action::Generate { source: s, seq: 1 });
            }
        }
        for f in &self.cfg.failures {
            let at = SimTime::from_secs_f64(f.at_s).ticks();
            self.schedule(at, Action::Fail { node: f.node });
        }
        // Round boundaries fall half an interval after a round's last
        // generation, so in-flight packets of the round are home first.
        let round_ticks = self.interval_ticks * self.cfg.interval_i as u64;
        let mut k = 1u32;
        while k as u64 * round_ticks - self.interval_ticks / 2 < self.duration_ticks {
            self.schedule(k as u64 * round_ticks - self.interval_ticks / 2, Action::Boundary { round: k });
            k += 1;
        }
    }

    fn run_loop(&mut self) {
        while let Some(((at, _), action)) = self.queue.pop_first() {
            self.now = at;
            match action {
                Action::Generate { source, seq } => self.generate(source, seq),
                Action::Send { node, pkt, copy, screened } => self.send(node, pkt, copy, screened),
                Action::Arrive { node, from, pkt, copy } => self.arrive(node, from, pkt, copy),
                Action::Boundary { round } => self.boundary(round),
                Action::Fail { node } => self.fail(node),
            }
        }
    }

    fn finish(mut self) -> Result<RunResult, SimError> {
        let round = self.round;
        self.scan(round);
        let total_ticks = self.now.max(self.duration_ticks);
        let idle = if self.cfg.duty_cycling {
            IdleModel::DutyCycled { rx_fraction: self.cfg.radio.idle_listen_fraction }
        } else {
            IdleModel::AlwaysOn
        };
        self.ledger.finalize(total_ticks, idle)?;
        let events = self.emitted + 1;
        self.emit(LogRecord::new(total_ticks, Event::End { events, total_ticks }));
        Ok(RunResult {
            ledger: self.ledger,
            deliveries: self.deliveries,
            dodag: self.dodag,
            generated: self.generated,
            total_ticks,
        })
    }

    fn cpu_ticks(&self) -> u64 {
        let r = &self.cfg.radio;
        r.cpu_forward_ticks + if self.cfg.scheme == Scheme::None { 0 } else { r.cpu_encode_ticks }
    }

    fn airtime(&self, bytes: usize) -> u64 {
        (bytes as u64 * 8 * TICKS_PER_SECOND).div_ceil(self.cfg.radio.bitrate_bps as u64)
    }

    fn undeliverable(&mut self, node: NodeId, pkt: &DataPacket, reason: impl Into<String>) {
        let rec = LogRecord::new(self.now, Event::Undeliverable { reason: reason.into() });
        self.emit(rec.at(node).packet(pkt.origin, pkt.seq));
    }

    fn generate(&mut self, source: NodeId, seq: u32) {
        if self.dodag.has_failed(source) {
            return;
        }
        let next = self.now + self.interval_ticks;
        if next < self.duration_ticks {
            self.schedule(next, Action::Generate { source, seq: seq + 1 });
        }
        self.generated += 1;
        let cpu = self.cpu_ticks();
        self.ledger.add_cpu(source, cpu);
        self.emit(LogRecord::new(self.now, Event::Generate { cpu_ticks: cpu }).at(source).packet(source, seq));
        let mut pkt = DataPacket::new(source, seq, self.cfg.payload_bytes);
        let (scheme, cap) = (self.cfg.scheme, self.cfg.pid_capacity);
        if let Err(e) = encode_hop(scheme, &mut pkt, source, None, &mut self.dodag, cap) {
            self.undeliverable(source, &pkt, e.to_string());
            return;
        }
        self.schedule(self.now + cpu, Action::Send { node: source, pkt, copy: 0, screened: false });
    }

    fn send(&mut self, node: NodeId, mut pkt: DataPacket, copy: u8, screened: bool) {
        let (origin, seq) = (pkt.origin, pkt.seq);
        if !screened {
            if self.scripted.contains(&(node, origin, seq)) {
                self.emit(LogRecord::new(self.now, Event::ScriptedDrop).at(node).packet(origin, seq));
                return;
            }
            let action = self.adversary.apply_malicious(&mut pkt, node, &self.population);
            let event = match action {
                MaliciousAction::Pass => None,
                MaliciousAction::Drop => Some(Event::MaliciousDrop),
                MaliciousAction::Stripped => Some(Event::Stripped),
                MaliciousAction::Forged => Some(Event::Forged),
            };
            if let Some(event) = event {
                self.emit(LogRecord::new(self.now, event).at(node).packet(origin, seq));
            }
            if action == MaliciousAction::Drop {
                return;
            }
        } else {
            self.emit(LogRecord::new(self.now, Event::Replayed).at(node).packet(origin, seq));
        }

        let to = match self.dodag.next_hop(node) {
            Ok(to) => to,
            Err(e) => return self.undeliverable(node, &pkt, e.to_string()),
        };
        let frame_bytes = pkt.frame_bytes(self.cfg.radio.header_bytes);
        let airtime = self.airtime(frame_bytes);
        let tx_ticks = airtime + if self.cfg.duty_cycling { self.cfg.radio.mac_delay_ticks } else { 0 };
        self.ledger.add_tx(node, tx_ticks);
        let transmit = Event::Transmit { to, copy, frame_bytes, provenance_bytes: pkt.provenance.wire_len(), tx_ticks };
        self.emit(LogRecord::new(self.now, transmit).at(node).packet(origin, seq));

        if !screened && self.adversary.replays(node) {
            self.schedule(self.now + tx_ticks, Action::Send { node, pkt: pkt.clone(), copy: copy + 1, screened: true });
        }

        let rate = self.loss_rate(node, to, origin);
        match self.adversary.apply_link_loss(node, to, origin, seq, copy, rate) {
            LinkOutcome::Lost => {
                self.emit(LogRecord::new(self.now, Event::LinkLoss { to, copy }).at(node).packet(origin, seq));
            }
            LinkOutcome::Delivered => {
                self.schedule(self.now + tx_ticks, Action::Arrive { node: to, from: node, pkt, copy });
            }
        }
    }

    fn loss_rate(&self, from: NodeId, to: NodeId, origin: NodeId) -> f64 {
        if let Some(Some(rate)) = self.dodag.graph().link_loss(from, to) {
            return rate;
        }
        let r = self.cfg.adversary.natural_loss_rate;
        match self.cfg.natural_loss_scope {
            LossScope::Link => r,
            LossScope::Path => {
                let hops = self.dodag.root_path(origin).map_or(1, PathTrace::hops).max(1);
                1.0 - (1.0 - r).powf(1.0 / hops as f64)
            }
        }
    }

    fn arrive(&mut self, node: NodeId, from: NodeId, mut pkt: DataPacket, copy: u8) {
        let (origin, seq) = (pkt.origin, pkt.seq);
        if self.dodag.has_failed(node) {
            return self.undeliverable(node, &pkt, format!("receiver {node} failed"));
        }
        let rx_ticks = self.airtime(pkt.frame_bytes(self.cfg.radio.header_bytes));
        self.ledger.add_rx(node, rx_ticks);
        self.emit(LogRecord::new(self.now, Event::Receive { from, copy, rx_ticks }).at(node).packet(origin, seq));

        let cpu = self.cpu_ticks();
        let scheme = self.cfg.scheme;
        if node == self.dodag.root() {
            return self.deliver(from, pkt, cpu);
        }
        let cap = self.cfg.pid_capacity;
        let encoded = encode_hop(scheme, &mut pkt, node, Some(from), &mut self.dodag, cap);
        if encoded.is_ok() && scheme == Scheme::Pppt {
            self.emit(LogRecord::new(self.now, Event::Record { child: from }).at(node).packet(origin, seq));
        }
        self.ledger.add_cpu(node, cpu);
        self.emit(LogRecord::new(self.now, Event::Process { cpu_ticks: cpu }).at(node).packet(origin, seq));
        if let Err(e) = encoded {
            return self.undeliverable(node, &pkt, e.to_string());
        }
        self.schedule(self.now + cpu, Action::Send { node, pkt, copy: 0, screened: false });
    }

    fn deliver(&mut self, from: NodeId, pkt: DataPacket, cpu: u64) {
        let root = self.dodag.root();
        let (origin, seq) = (pkt.origin, pkt.seq);
        let scheme = self.cfg.scheme;
        if scheme == Scheme::Pppt && receive_at_root(&pkt, from, &mut self.dodag).is_ok() {
            self.emit(LogRecord::new(self.now, Event::Record { child: from }).at(root).packet(origin, seq));
        }
        self.ledger.add_cpu(root, cpu);
        self.emit(LogRecord::new(self.now, Event::Process { cpu_ticks: cpu }).at(root).packet(origin, seq));

        let assessment = if self.arrived.insert((origin, seq)) {
            self.window.entry(origin).or_default().insert(seq);
            assess(&pkt, scheme, &self.dodag)
        } else {
            crate::codec::Assessment { verdict: Verdict::Duplicate, trace: None }
        };
        let bytes = pkt.provenance_bytes();
        let event = Event::Delivered {
            from,
            provenance: (!pkt.provenance.is_absent()).then(|| hex::encode(&bytes)),
            digest: pkt.digest.to_hex(),
            flag: pkt.eh_prov_flag,
            verdict: assessment.verdict,
        };
        self.emit(LogRecord::new(self.now, event).at(root).packet(origin, seq));
        self.deliveries.push(Delivery {
            time: SimTime::from_ticks(self.now),
            origin,
            seq,
            provenance_bytes: bytes.len(),
            provenance: pkt.provenance,
            verdict: assessment.verdict,
            trace: assessment.trace,
        });
    }

    /// Gap scan over the current round, then history reset.
    fn boundary(&mut self, round: u32) {
        self.scan(round);
        if self.cfg.scheme == Scheme::Pppt {
            let cleared = reset_interval(&mut self.dodag);
            self.emit(LogRecord::new(self.now, Event::IntervalReset { round, cleared }).at(self.dodag.root()));
        }
        self.window.clear();
        self.round = round + 1;
    }

    fn scan(&mut self, round: u32) {
        if self.cfg.scheme != Scheme::Pppt {
            return;
        }
        let view =
            RootView { window_lo: (round - 1) * self.cfg.interval_i + 1, delivered: std::mem::take(&mut self.window) };
        for drop in detect_drops(&view, &self.dodag, &self.dodag) {
            let (node, link_to, candidates) = match drop.localization {
                Localization::Node { node, link_to } => (Some(node), link_to, Vec::new()),
                Localization::Candidates(c) => (None, None, c),
            };
            let mut rec = LogRecord::new(self.now, Event::DropDetected { round, link_to, candidates })
                .packet(drop.origin, drop.seq);
            rec.node = node;
            self.emit(rec);
        }
        self.window = view.delivered;
    }

    fn fail(&mut self, node: NodeId) {
        if let Ok(report) = self.dodag.reparent(node) {
            let event = Event::NodeFailed { reparented: report.reparented, detached: report.detached };
            self.emit(LogRecord::new(self.now, event).at(node));
        }
    }
}
