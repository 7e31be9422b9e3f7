//! CSV rows and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest as _, Sha256};

use super::HarnessError;
use crate::codec::Scheme;
use crate::metrics::{energy_from_log, pgt_series, LogSummary, MetricsError};
use crate::sim::{avg_power_mw, LogRecord, ScenarioConfig, TopologySpec, VERSION};
use crate::types::SimTime;

/// One metric value. Column order is stable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub scenario_id: String,
    pub scheme: String,
    pub hops: Option<u32>,
    pub interval_s: f64,
    pub metric: String,
    pub value: f64,
}

/// Labels shared by every row of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    pub scenario_id: String,
    pub scheme: Scheme,
    pub hops: Option<u32>,
    pub interval_s: f64,
}

impl RowKey {
    pub fn for_config(scenario_id: impl Into<String>, cfg: &ScenarioConfig) -> Self {
        RowKey {
            scenario_id: scenario_id.into(),
            scheme: cfg.scheme,
            hops: hop_label(&cfg.topology),
            interval_s: cfg.packet_interval_s,
        }
    }

    pub fn row(&self, metric: impl Into<String>, value: f64) -> CsvRow {
        CsvRow {
            scenario_id: self.scenario_id.clone(),
            scheme: self.scheme.as_str().to_string(),
            hops: self.hops,
            interval_s: self.interval_s,
            metric: metric.into(),
            value,
        }
    }
}

/// Forwarder count for generated chains.
pub fn hop_label(t: &TopologySpec) -> Option<u32> {
    match t {
        TopologySpec::Linear { forwarders } => Some(*forwarders as u32),
        TopologySpec::Branches { depth, .. } => Some(*depth as u32),
        _ => None,
    }
}

/// Standard metric rows for one run, computed from its log alone.
pub fn run_rows(key: &RowKey, records: &[LogRecord]) -> Result<Vec<CsvRow>, MetricsError> {
    let summary = LogSummary::from_records(records)?;
    let ledger = energy_from_log(records)?;
    let secs = SimTime::from_ticks(summary.total_ticks).as_secs_f64();
    let energy = ledger.total_energy_mj();
    let power = avg_power_mw(energy, secs, ledger.node_count())?;
    let pgt = pgt_series(records);
    let sizes = &summary.provenance_sizes;

    let mut rows = vec![
        key.row("sent", summary.sent() as f64),
        key.row("delivered", summary.delivered.len() as f64),
        key.row("loss_rate", summary.loss_rate()),
        key.row("energy_mj", energy),
        key.row("power_mw_per_node", power),
        key.row("pgt_avg_min", pgt.average_min),
    ];
    if !sizes.is_empty() {
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        rows.push(key.row("provenance_bytes", mean));
        rows.push(key.row("provenance_bytes_min", *sizes.iter().min().expect("nonempty") as f64));
        rows.push(key.row("provenance_bytes_max", *sizes.iter().max().expect("nonempty") as f64));
    }
    if summary.config.scheme == Scheme::Pppt {
        rows.push(key.row("actual_drops", summary.actual_drops() as f64));
        rows.push(key.row("detected_drops", summary.detected_drops() as f64));
        rows.push(key.row("pddr", summary.pddr()?));
    }
    for (label, count) in &summary.verdicts {
        rows.push(key.row(format!("verdict_{}", label.replace(' ', "_")), *count as f64));
    }
    Ok(rows)
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Csv { path: path.into(), source: e })?;
    for r in rows {
        w.serialize(r).map_err(|e| HarnessError::Csv { path: path.into(), source: e })?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical TOML form of a config.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    sha256_hex(cfg.to_toml().as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEntry {
    pub scenario_id: String,
    pub config_hash: String,
    pub log_hash: String,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// Scenario name or preset name.
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ScenarioConfig>,
    pub runs: Vec<RunEntry>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(name: impl Into<String>) -> Self {
        Manifest {
            tool: "pppt",
            version: VERSION,
            name: name.into(),
            config: None,
            runs: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))?;
        Ok(path)
    }
}
