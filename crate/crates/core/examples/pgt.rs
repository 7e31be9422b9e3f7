//! Provenance generation time: receive-to-forward time per hop, plain
//! forwarding against routing-pair provenance.
//!
//!     cargo run --example pgt

use pppt::codec::Scheme;
use pppt::metrics::pgt_series;
use pppt::sim::{run, ScenarioConfig, TopologySpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>4} {:>14} {:>14} {:>14}", "hops", "none (min)", "pppt (min)", "difference");
    for hops in 1..=7 {
        let mut avg = [0.0; 2];
        for (i, scheme) in [Scheme::None, Scheme::Pppt].into_iter().enumerate() {
            let mut cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders: hops });
            cfg.scheme = scheme;
            avg[i] = pgt_series(run(&cfg)?.log.records()).average_min;
        }
        println!("{hops:>4} {:>14.3e} {:>14.3e} {:>14.3e}", avg[0], avg[1], avg[1] - avg[0]);
    }
    Ok(())
}
