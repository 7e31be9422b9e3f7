//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! straight to stderr (bypassing the harness capture) and fails on either a
//! wrong result or a blown time budget.

use std::io::Write;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngAlgorithm, TestRng, TestRunner};

use pppt::codec::{decode, encode_at_forwarder, encode_at_source, receive_at_root, Scheme, Verdict};
use pppt::dodag::build_dodag;
use pppt::harness::defaults::{DEFAULT_SEED, HOPS, INTERVALS_S, PDDR_INTERVAL_I, PDDR_PACKETS, PDDR_SEEDS};
use pppt::harness::{drop_attack_config, jobs, Preset};
use pppt::metrics::{provenance_size_bytes, LogSummary, SummaryBuilder};
use pppt::sim::{
    avg_power_mw, run, run_with_sink, Event, LinkSpec, NodeEnergy, NodeSpec, ScenarioConfig, TopologySpec,
};
use pppt::topology::TopologyGraph;
use pppt::types::{serialize_provenance, DataPacket, NodeId, NodeRole, TICKS_PER_SECOND};

fn n(id: u8) -> NodeId {
    NodeId::from_raw(id)
}

/// Prints the criterion line, then enforces both the verdict and the budget.
fn report(id: u8, title: &str, started: Instant, budget_s: u64, failures: Vec<String>, detail: String) {
    let elapsed = started.elapsed();
    let in_time = elapsed < Duration::from_secs(budget_s);
    let ok = failures.is_empty() && in_time;
    let line = format!(
        "criterion {id} [{}] {title}: {detail} ({:.2}s of {budget_s}s){}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        if failures.is_empty() { String::new() } else { format!(" failures: {}", failures.join("; ")) }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(failures.is_empty(), "criterion {id}: {failures:?}");
    assert!(in_time, "criterion {id}: took {elapsed:?}, budget {budget_s}s");
}

fn summarize(cfg: &ScenarioConfig) -> LogSummary {
    let mut sink = SummaryBuilder::default();
    run_with_sink(cfg, &mut sink).expect("scenario runs");
    sink.finish().expect("complete log")
}

#[test]
fn c1_provenance_size_over_hops() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut pid = Vec::new();
    for h in HOPS {
        let pppt = provenance_size_bytes(Scheme::Pppt, h).unwrap();
        let bf = provenance_size_bytes(Scheme::Bf, h).unwrap();
        pid.push(provenance_size_bytes(Scheme::Pid, h).unwrap());
        if pppt != 2 {
            failures.push(format!("pppt at {h} hops is {pppt}"));
        }
        if bf != 18 {
            failures.push(format!("bf at {h} hops is {bf}"));
        }
    }
    let steps: Vec<i64> = pid.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    if !(steps.iter().all(|&d| d == steps[0]) && steps[0] > 0) {
        failures.push(format!("pid not strictly linear: {pid:?}"));
    }
    report(1, "provenance size vs hops", t, 5, failures, format!("pppt 2, bf 18, pid {pid:?}"));
}

#[test]
fn c2_provenance_size_over_sources() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut packets = 0;
    for job in jobs(Preset::Fig12, DEFAULT_SEED) {
        let expect = match job.config.scheme {
            Scheme::Pppt => 2,
            Scheme::Bf => 18,
            other => panic!("unexpected scheme {other:?} in the source-count grid"),
        };
        let out = run(&job.config).unwrap();
        if out.result.deliveries.is_empty() {
            failures.push(format!("{}: nothing delivered", job.scenario_id));
        }
        for d in &out.result.deliveries {
            packets += 1;
            if d.provenance_bytes != expect {
                failures.push(format!("{} {}#{}: {} bytes", job.scenario_id, d.origin, d.seq, d.provenance_bytes));
            }
        }
    }
    report(2, "provenance size vs sources", t, 10, failures, format!("{packets} deliveries, pppt 2, bf 18"));
}

#[test]
fn c3_worked_example_golden() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut d = build_dodag(&TopologyGraph::sample()).unwrap();
    let mut pkt = DataPacket::new(n(10), 1, 200);
    let mut wire = Vec::new();
    encode_at_source(&mut pkt, n(10), &d).unwrap();
    wire.push(serialize_provenance(&pkt.provenance).unwrap());
    encode_at_forwarder(&mut pkt, n(6), n(10), &mut d).unwrap();
    wire.push(serialize_provenance(&pkt.provenance).unwrap());
    encode_at_forwarder(&mut pkt, n(3), n(6), &mut d).unwrap();
    wire.push(serialize_provenance(&pkt.provenance).unwrap());
    receive_at_root(&pkt, n(3), &mut d).unwrap();

    if wire != [vec![6, 10], vec![3, 6], vec![1, 3]] {
        failures.push(format!("pair bytes {wire:02x?}"));
    }
    let mut holders = Vec::new();
    for rt in d.routing_tables() {
        for e in rt.entries() {
            if e.has_seen(n(10), 1) {
                holders.push((rt.owner.get(), e.child.get()));
            }
        }
    }
    holders.sort();
    if holders != [(1, 3), (3, 6), (6, 10)] {
        failures.push(format!("routing entries holding seq 1: {holders:?}"));
    }
    let decoded = decode(&pkt, &d).unwrap();
    let trace: Vec<u8> = decoded.trace.nodes().iter().map(|x| x.get()).collect();
    if trace != [10, 6, 3, 1] || !decoded.verified {
        failures.push(format!("decode {trace:?} verified {}", decoded.verified));
    }
    if pkt.digest.to_hex() != "c79b932e1e1da3c0e098e5ad2c422937eb904a76cf61d83975a74a68fbb04b99" {
        failures.push(format!("digest {}", pkt.digest.to_hex()));
    }
    report(3, "worked example", t, 1, failures, "<6,10> -> <3,6> -> <1,3>, decode [10,6,3,1]".into());
}

#[test]
fn c4_security_claims() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let chain = || {
        let mut c = ScenarioConfig::new(TopologySpec::Linear { forwarders: 7 });
        c.adversary.malicious_node = Some(n(3));
        c
    };

    // (a) Strip: every delivery that crossed node 3 is discarded as stripped.
    let mut cfg = ScenarioConfig::new(TopologySpec::Sample);
    cfg.adversary.malicious_node = Some(n(3));
    cfg.adversary.strip_provenance = true;
    let out = run(&cfg).unwrap();
    let (mut affected, mut stripped) = (0, 0);
    for d in &out.result.deliveries {
        if out.result.dodag.root_path(d.origin).is_some_and(|p| p.contains(n(3))) {
            affected += 1;
            stripped += usize::from(d.verdict == Verdict::Stripped && d.verdict.label() == "provenance stripped");
        } else if !d.verdict.is_verified() {
            failures.push(format!("untouched {}#{} got {}", d.origin, d.seq, d.verdict.label()));
        }
    }
    if affected == 0 || stripped != affected {
        failures.push(format!("strip: {stripped}/{affected} discarded as stripped"));
    }

    // (b) Forge: no forged packet is accepted.
    let mut cfg = chain();
    cfg.adversary.forge_provenance = true;
    cfg.sim_duration_s = 12_000.0;
    let out = run(&cfg).unwrap();
    let forged = out.log.records().iter().filter(|r| matches!(r.event, Event::Forged)).count();
    let false_verified = out.result.deliveries.iter().filter(|d| d.verdict.is_verified()).count();
    if forged < 1000 || false_verified != 0 {
        failures.push(format!("forge: {forged} forged, {false_verified} verified"));
    }

    // (c) One dropper at each forwarder position; every localized drop
    // names it.
    let mut localized_total = 0;
    for m in 2..=8u8 {
        let mut cfg = chain();
        cfg.adversary.malicious_node = Some(n(m));
        cfg.adversary.malicious_drop_rate = 0.2;
        cfg.sim_duration_s = 2_000.0;
        let s = summarize(&cfg);
        let right = s.localized.get(&n(m)).copied().unwrap_or(0);
        let total: usize = s.localized.values().sum();
        localized_total += total;
        if right == 0 || right != total || total as u64 != s.detected_drops() {
            failures.push(format!("dropper {m}: localized {:?}, detected {}", s.localized, s.detected_drops()));
        }
    }
    report(
        4,
        "security claims",
        t,
        30,
        failures,
        format!("strip {stripped}/{affected}, forge {forged} forged 0 verified, {localized_total} drops localized over 7 placements"),
    );
}

#[test]
fn c5_packet_loss_convergence() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let packets = 2000;
    let natural = summarize(&drop_attack_config(0.0, DEFAULT_SEED, packets, 256));
    let p = 0.01;
    let sigma = (p * (1.0 - p) / natural.sent() as f64).sqrt();
    let base = natural.loss_rate();
    if natural.sent() < packets as u64 || (base - p).abs() > 3.0 * sigma {
        failures.push(format!("natural loss {base:.4} over {} packets, 3 sigma {:.4}", natural.sent(), 3.0 * sigma));
    }
    let mut rates = vec![base];
    for m in [0.03, 0.06, 0.09] {
        let r = summarize(&drop_attack_config(m, DEFAULT_SEED, packets, 256)).loss_rate();
        if r <= base {
            failures.push(format!("malicious {m}: loss {r:.4} not above {base:.4}"));
        }
        rates.push(r);
    }
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.4}")).collect();
    report(
        5,
        "cumulative loss",
        t,
        30,
        failures,
        format!("loss at 0/3/6/9% = {}, 1% +/- {:.4}", shown.join(" "), 3.0 * sigma),
    );
}

#[test]
fn c6_pddr_trend() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let means: Vec<f64> = [0.03, 0.06, 0.09]
        .iter()
        .map(|&m| {
            let per_seed: Vec<f64> = (DEFAULT_SEED..DEFAULT_SEED + PDDR_SEEDS)
                .map(|s| summarize(&drop_attack_config(m, s, PDDR_PACKETS, PDDR_INTERVAL_I)).pddr().unwrap())
                .collect();
            per_seed.iter().sum::<f64>() / per_seed.len() as f64
        })
        .collect();
    if !means.windows(2).all(|w| w[1] <= w[0]) {
        failures.push(format!("not non-increasing: {means:?}"));
    }
    let shown: Vec<String> = means.iter().map(|r| format!("{r:.4}")).collect();
    report(6, "PDDR trend", t, 60, failures, format!("mean PDDR at 3/6/9% = {}", shown.join(" ")));
}

#[test]
fn c7_energy_formula_and_trends() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let close = |a: f64, b: f64| if b == 0.0 { a == 0.0 } else { ((a - b) / b).abs() <= 1e-9 };
    let zero = NodeEnergy::default().energy_mj();
    let tx = NodeEnergy { tx_ticks: TICKS_PER_SECOND, ..Default::default() }.energy_mj();
    let power = avg_power_mw(468.0, 600.0, 1).unwrap();
    if !close(zero, 0.0) || !close(tx, 468.0) || !close(power, 0.78) {
        failures.push(format!("formula: {zero} mJ, {tx} mJ, {power} mW"));
    }

    let per_node = |hops: u8, interval: f64, dc: bool| {
        let mut cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders: hops });
        cfg.packet_interval_s = interval;
        cfg.duty_cycling = dc;
        let r = run(&cfg).unwrap().result;
        let secs = r.total_ticks as f64 / TICKS_PER_SECOND as f64;
        avg_power_mw(r.ledger.total_energy_mj(), secs, r.ledger.node_count()).unwrap()
    };
    let mut worst_spread: f64 = 0.0;
    for h in HOPS {
        let dc: Vec<f64> = INTERVALS_S.iter().map(|&i| per_node(h, i, true)).collect();
        if !dc.windows(2).all(|w| w[1] <= w[0]) {
            failures.push(format!("duty cycled, {h} hops: {dc:?}"));
        }
    }
    for i in INTERVALS_S {
        let flat: Vec<f64> = HOPS.map(|h| per_node(h, i, false)).collect();
        let max = flat.iter().cloned().fold(f64::MIN, f64::max);
        let min = flat.iter().cloned().fold(f64::MAX, f64::min);
        let spread = (max - min) / min;
        worst_spread = worst_spread.max(spread);
        if spread >= 0.05 {
            failures.push(format!("always on, {i}s: spread {spread:.4}"));
        }
    }
    report(
        7,
        "energy",
        t,
        60,
        failures,
        format!("468 mJ / 0.78 mW exact, duty-cycled power falls with interval, always-on spread {:.2e}", worst_spread),
    );
}

#[test]
fn c8_determinism() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut strip = ScenarioConfig::new(TopologySpec::Sample);
    strip.adversary.malicious_node = Some(n(3));
    strip.adversary.strip_provenance = true;
    let scenarios = [drop_attack_config(0.06, 7, 2000, PDDR_INTERVAL_I), strip];
    for cfg in &scenarios {
        let (a, b) = (run(cfg).unwrap().log_hash, run(cfg).unwrap().log_hash);
        if a != b {
            failures.push(format!("{}: {a} != {b}", cfg.name));
        }
    }
    let mut other = scenarios[0].clone();
    other.adversary.rng_seed += 1;
    if run(&other).unwrap().log_hash == run(&scenarios[0]).unwrap().log_hash {
        failures.push("a different seed gave the same log".into());
    }
    report(8, "determinism", t, 10, failures, "identical log hashes on rerun, distinct across seeds".into());
}

/// Random tree of up to 15 nodes where nobody has more than four children.
/// Leaves are sources.
fn tree_strategy() -> impl Strategy<Value = Vec<usize>> {
    (2usize..=15).prop_flat_map(|size| proptest::collection::vec(any::<usize>(), size - 1))
}

fn tree_config(choices: &[usize]) -> ScenarioConfig {
    let size = choices.len() + 1;
    let mut children = vec![0usize; size];
    let mut links = Vec::new();
    for (i, c) in choices.iter().enumerate() {
        let eligible: Vec<usize> = (0..=i).filter(|&p| children[p] < 4).collect();
        let parent = eligible[c % eligible.len()];
        children[parent] += 1;
        links.push(LinkSpec { a: n(parent as u8 + 1), b: n(i as u8 + 2), loss: None });
    }
    let nodes = (0..size)
        .map(|i| NodeSpec {
            id: n(i as u8 + 1),
            role: match (i, children[i]) {
                (0, _) => NodeRole::Root,
                (_, 0) => NodeRole::Source,
                _ => NodeRole::Forwarder,
            },
        })
        .collect();
    let mut cfg = ScenarioConfig::new(TopologySpec::Graph { nodes, links });
    cfg.sim_duration_s = 300.0;
    cfg
}

#[test]
fn c9_benign_round_trip() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let delivered = std::cell::Cell::new(0usize);
    let config = ProptestConfig { cases: 100, ..ProptestConfig::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let result = runner.run(&tree_strategy(), |choices| {
        let out = run(&tree_config(&choices)).expect("tree scenario runs");
        let paths = out.result.dodag.root_paths();
        prop_assert_eq!(out.result.deliveries.len() as u64, out.result.generated);
        for d in &out.result.deliveries {
            prop_assert!(d.verdict.is_verified(), "{}#{} got {}", d.origin, d.seq, d.verdict.label());
            prop_assert_eq!(d.trace.as_ref(), paths.get(&d.origin));
        }
        delivered.set(delivered.get() + out.result.deliveries.len());
        Ok(())
    });
    if let Err(e) = result {
        failures.push(e.to_string());
    }
    report(
        9,
        "benign round trip",
        t,
        60,
        failures,
        format!("100 random trees, {} deliveries all verified", delivered.get()),
    );
}
