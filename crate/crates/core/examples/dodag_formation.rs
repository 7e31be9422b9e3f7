//! Builds the sample DODAG, dumps its tables, then fails node 3 and shows
//! how the orphaned subtree re-selects parents.
//!
//!     cargo run --example dodag_formation

use pppt::dodag::{build_dodag, Dodag};
use pppt::topology::TopologyGraph;
use pppt::types::NodeId;

fn dump(d: &Dodag) {
    println!("{:>4} {:>4} {:>6}  path", "node", "rank", "parent");
    for n in d.nodes() {
        let parent = d.parent(n).map_or("-".to_string(), |p| p.to_string());
        let rank = d.rank(n).map_or("-".to_string(), |r| r.to_string());
        let path = d.root_path(n).map_or(String::new(), |p| p.to_string());
        println!("{n:>4} {rank:>4} {parent:>6}  {path}");
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let three = NodeId::from_raw(3);
    let mut d = build_dodag(&TopologyGraph::sample())?;
    dump(&d);

    let nt = d.neighbor_table(three).expect("node 3 exists");
    println!("\nNT(3): parent {:?}, substitutes {:?}, neighbors {:?}", nt.parent, nt.substitutes, nt.neighbors);
    let rt = d.routing_table(three).expect("node 3 exists");
    for e in rt.entries() {
        println!("RT(3): next hop {} reaches {:?}", e.child, e.destinations);
    }

    let report = d.reparent(three)?;
    println!("\nnode 3 fails");
    for (node, old, new) in &report.reparented {
        println!("  node {node} re-parents {old} -> {new}");
    }
    println!("  detached: {:?}", report.detached);
    dump(&d);
    Ok(())
}
