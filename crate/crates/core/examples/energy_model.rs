//! The tick-based energy model: hand-checkable formula values, then
//! per-node power of a chain with and without duty cycling.
//!
//!     cargo run --example energy_model

use pppt::sim::{avg_power_mw, run, NodeEnergy, ScenarioConfig, TopologySpec};
use pppt::types::TICKS_PER_SECOND;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one_second_tx = NodeEnergy { tx_ticks: TICKS_PER_SECOND, ..Default::default() };
    println!("1 s of transmit  = {:.3} mJ", one_second_tx.energy_mj());
    let one_second_lpm = NodeEnergy { lpm_ticks: TICKS_PER_SECOND, ..Default::default() };
    println!("1 s of low power = {:.4} mJ", one_second_lpm.energy_mj());
    println!("468 mJ over 600 s on one node = {:.2} mW\n", avg_power_mw(468.0, 600.0, 1)?);

    println!("{:>4} {:>9} {:>12} {:>12}", "hops", "interval", "dc mW/node", "no-dc mW/node");
    for hops in [1, 4, 7] {
        for interval in [10.0, 40.0] {
            let mut powers = Vec::new();
            for dc in [true, false] {
                let mut cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders: hops });
                cfg.packet_interval_s = interval;
                cfg.duty_cycling = dc;
                let result = run(&cfg)?.result;
                let secs = result.total_ticks as f64 / TICKS_PER_SECOND as f64;
                powers.push(avg_power_mw(result.ledger.total_energy_mj(), secs, result.ledger.node_count())?);
            }
            println!("{hops:>4} {interval:>8}s {:>12.4} {:>12.4}", powers[0], powers[1]);
        }
    }
    Ok(())
}
