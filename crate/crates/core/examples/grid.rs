//! Runs the provenance-size preset grid in memory and pivots it.
//!
//!     cargo run --example grid

use std::collections::BTreeMap;

use pppt::harness::{run_grid, Preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = run_grid(Preset::Fig11, 1)?;
    let mut table: BTreeMap<u32, BTreeMap<String, f64>> = BTreeMap::new();
    for row in grid.rows("fig11.csv").iter().filter(|r| r.metric == "provenance_bytes") {
        table.entry(row.hops.unwrap_or(0)).or_default().insert(row.scheme.clone(), row.value);
    }
    let schemes: Vec<String> = table.values().next().map(|m| m.keys().cloned().collect()).unwrap_or_default();
    println!("hops {}", schemes.iter().map(|s| format!("{s:>6}")).collect::<String>());
    for (hops, cols) in &table {
        let cells: String =
            schemes.iter().map(|s| format!("{:>6}", cols.get(s).copied().unwrap_or(f64::NAN))).collect();
        println!("{hops:>4} {cells}");
    }
    for entry in grid.manifest.runs.iter().take(3) {
        println!("{} log {}", entry.scenario_id, &entry.log_hash[..16]);
    }
    Ok(())
}
