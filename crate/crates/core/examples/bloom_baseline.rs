//! The 144-bit Bloom filter baseline: membership, false positives, and why
//! it cannot give an ordered path.
//!
//!     cargo run --example bloom_baseline

use pppt::codec::{assess, bf_decode, encode_hop, BloomFilter, Scheme};
use pppt::dodag::build_dodag;
use pppt::topology::TopologyGraph;
use pppt::types::{DataPacket, NodeId};

fn n(id: u8) -> NodeId {
    NodeId::from_raw(id)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut dodag = build_dodag(&TopologyGraph::sample())?;
    let mut pkt = DataPacket::new(n(10), 1, 200);
    encode_hop(Scheme::Bf, &mut pkt, n(10), None, &mut dodag, 0)?;
    for (node, child) in [(6, 10), (3, 6)] {
        encode_hop(Scheme::Bf, &mut pkt, n(node), Some(n(child)), &mut dodag, 0)?;
    }
    println!("wire size {} bytes", pkt.provenance.wire_len());
    let positives = bf_decode(&pkt, dodag.nodes())?;
    println!("nodes testing positive (unordered): {positives:?}");
    println!("root verdict: {}", assess(&pkt, Scheme::Bf, &dodag).verdict.label());

    // Membership over every possible id shows the false-positive tail.
    let mut f = BloomFilter::new();
    for id in [10, 6, 3] {
        f.insert(n(id));
    }
    let fp = (1..=255u8).filter(|id| ![10, 6, 3].contains(id) && f.contains(n(*id))).count();
    println!("false positives among 252 outsiders: {fp} (theory {:.2e} per id)", BloomFilter::theoretical_fpr(3));
    Ok(())
}
