//! Drop detection on an eight-hop chain: a scripted drop at node 3 and a
//! loss on the source's own uplink, both found by the root's gap scan and
//! localized from routing-table evidence.
//!
//!     cargo run --example drop_localization

use pppt::sim::{run, Event, ScenarioConfig, ScriptedDrop, TopologySpec};
use pppt::types::NodeId;

fn n(id: u8) -> NodeId {
    NodeId::from_raw(id)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders: 7 });
    cfg.sim_duration_s = 100.0;
    let source = n(9);
    cfg.scripted_drops = vec![
        ScriptedDrop { node: n(3), origin: source, seq: 4 },
        // A drop by the source itself looks exactly like a lost uplink.
        ScriptedDrop { node: source, origin: source, seq: 7 },
    ];
    let out = run(&cfg)?;
    for r in out.log.records() {
        if let Event::DropDetected { link_to, candidates, .. } = &r.event {
            match r.node {
                Some(node) => println!(
                    "seq {} from {} dropped: last holder {node}, failed link {node} -> {}",
                    r.seq.unwrap(),
                    r.origin.unwrap(),
                    link_to.map_or("?".into(), |l| l.to_string())
                ),
                None => println!("seq {} ambiguous, suspects {candidates:?}", r.seq.unwrap()),
            }
        }
    }
    println!("delivered {} of {}", out.result.unique_delivered(), out.result.generated);
    Ok(())
}
