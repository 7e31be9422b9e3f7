//! Cumulative loss over 2,000 packets on an eight-hop chain with 1%
//! natural loss, with and without a dropping forwarder at node 3.
//!
//!     cargo run --release --example packet_loss

use pppt::harness::drop_attack_config;
use pppt::metrics::{packet_loss_series, LogSummary};
use pppt::sim::run;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for rate in [0.0, 0.03, 0.06, 0.09] {
        let cfg = drop_attack_config(rate, 1, 2000, 256);
        let out = run(&cfg)?;
        let series = packet_loss_series(out.log.records(), 500)?;
        let points: Vec<String> = series.iter().map(|p| format!("{}:{:.4}", p.sent, p.rate)).collect();
        let summary = LogSummary::from_records(out.log.records())?;
        println!(
            "malicious {:>4.0}%  loss {}  detected {}/{}",
            rate * 100.0,
            points.join(" "),
            summary.detected_drops(),
            summary.actual_drops()
        );
    }
    Ok(())
}
