//! One packet from node 10 through the ten-node sample DODAG, hop by hop.
//!
//! Prints the routing pair after every encode step, the sequence numbers
//! pinned to routing entries, and the root's reconstruction.
//!
//!     cargo run --example worked_example

use pppt::codec::{decode, encode_at_forwarder, encode_at_source, receive_at_root};
use pppt::dodag::build_dodag;
use pppt::topology::TopologyGraph;
use pppt::types::{serialize_provenance, DataPacket, NodeId, ProvenanceField};

fn n(id: u8) -> NodeId {
    NodeId::from_raw(id)
}

fn pair(pkt: &DataPacket) -> String {
    match &pkt.provenance {
        ProvenanceField::Pppt(p) => format!("{p} bytes={:02x?}", serialize_provenance(&pkt.provenance).unwrap()),
        other => format!("{other:?}"),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut dodag = build_dodag(&TopologyGraph::sample())?;
    let mut pkt = DataPacket::new(n(10), 1, 200);

    encode_at_source(&mut pkt, n(10), &dodag)?;
    println!("node 10 embeds   {}", pair(&pkt));

    for (node, child) in [(6, 10), (3, 6)] {
        encode_at_forwarder(&mut pkt, n(node), n(child), &mut dodag)?;
        println!("node {node:<2} rewrites {}", pair(&pkt));
    }
    receive_at_root(&pkt, n(3), &mut dodag)?;

    println!("\nrouting entries holding (10, seq 1):");
    for rt in dodag.routing_tables() {
        for entry in rt.entries() {
            if entry.has_seen(n(10), 1) {
                println!("  RT({}) entry <{}> <- seq 1", rt.owner, entry.child);
            }
        }
    }

    let decoded = decode(&pkt, &dodag)?;
    println!("\nroot reconstructs {}", decoded.trace);
    println!("matches root path {}", decoded.verified);
    println!("digest            {}", pkt.digest.to_hex());
    Ok(())
}
