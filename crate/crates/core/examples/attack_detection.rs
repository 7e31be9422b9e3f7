//! A compromised forwarder (node 3 of an eight-hop chain) under each attack
//! mode, and what the root concludes about every delivery.
//!
//!     cargo run --example attack_detection

use pppt::harness::verify_log;
use pppt::metrics::LogSummary;
use pppt::sim::{run, ScenarioConfig, TopologySpec};
use pppt::types::NodeId;

type Mode = (&'static str, fn(&mut ScenarioConfig));

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let modes: [Mode; 5] = [
        ("benign", |_| {}),
        ("strip", |c| c.adversary.strip_provenance = true),
        ("forge", |c| c.adversary.forge_provenance = true),
        ("forge + re-digest", |c| {
            c.adversary.forge_provenance = true;
            c.adversary.forge_redigest = true;
        }),
        ("replay", |c| c.adversary.replay = true),
    ];
    for (label, apply) in modes {
        let mut cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders: 7 });
        cfg.adversary.malicious_node = Some(NodeId::from_raw(3));
        apply(&mut cfg);
        let out = run(&cfg)?;
        let summary = LogSummary::from_records(out.log.records())?;
        let offline = verify_log(&out.log)?;
        println!(
            "{label:<18} sent {:>3}  verdicts {:?}  offline agrees: {}",
            summary.sent(),
            summary.verdicts,
            offline.is_consistent()
        );
    }
    Ok(())
}
