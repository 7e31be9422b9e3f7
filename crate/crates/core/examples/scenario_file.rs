//! Loads a TOML scenario, runs it, writes the log/metrics/manifest, and
//! re-verifies the written log.
//!
//!     cargo run --example scenario_file -- scenarios/sample_strip.toml

use std::path::PathBuf;

use pppt::harness::{cmd_run, cmd_verify};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/sample_strip.toml"));
    let out = std::env::temp_dir().join("pppt-scenario-example");
    let artifacts = cmd_run(&path, &out, None)?;
    println!("wrote {} (hash {})", artifacts.log.display(), artifacts.log_hash);
    let report = cmd_verify(&artifacts.log)?;
    for (label, count) in &report.counts {
        println!("  {label:<20} {count}");
    }
    Ok(())
}
