//! Scenario runner and reproduction harness behind the command line.

mod presets;
mod report;
mod verify;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

pub use presets::{drop_attack_config, jobs, run_grid, GridOutcome, Job, Preset};
pub use report::{config_hash, hop_label, run_rows, sha256_hex, write_csv, CsvRow, Manifest, RowKey, RunEntry};
pub use verify::{verify_log, VerifyReport};

use crate::metrics::MetricsError;
use crate::sim::{run, ConfigError, EventLog, LogError, ScenarioConfig, SimError};

pub mod defaults {
    pub use super::presets::{
        DEFAULT_SEED, HOPS, INTERVALS_S, LOSS_SERIES_WINDOW, MALICIOUS_NODE, MALICIOUS_RATES, NATURAL_LOSS,
        PDDR_INTERVAL_I, PDDR_PACKETS, PDDR_SEEDS, SOURCE_COUNTS,
    };
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("event log: {0}")]
    Log(#[from] LogError),
    #[error("unknown preset {name:?}; known presets: {known}")]
    UnknownPreset { name: String, known: String },
    #[error("inconsistent log: {0}")]
    Inconsistent(String),
    #[error("{0} deliveries disagree with their logged verdict")]
    VerdictMismatch(usize),
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => HarnessError::Config(c),
            other => HarnessError::Sim(other),
        }
    }
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// 2 for bad input (scenario, preset name), 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownPreset { .. } => 2,
            _ => 1,
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(ScenarioConfig::from_toml(&text)?)
}

/// Files written by [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub log: PathBuf,
    pub metrics: PathBuf,
    pub manifest: PathBuf,
    pub log_hash: String,
}

/// Runs one scenario file; writes `events.ndjson`, `metrics.csv` and
/// `manifest.json` into `out_dir`.
pub fn cmd_run(scenario: &Path, out_dir: &Path, seed: Option<u64>) -> Result<RunArtifacts, HarnessError> {
    let mut cfg = load_scenario(scenario)?;
    if let Some(s) = seed {
        cfg.adversary.rng_seed = s;
    }
    run_config(&cfg, out_dir)
}

pub fn run_config(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunArtifacts, HarnessError> {
    let out = run(cfg)?;
    ensure_dir(out_dir)?;
    let log_path = out_dir.join("events.ndjson");
    let file = fs::File::create(&log_path).map_err(|e| HarnessError::io(&log_path, e))?;
    out.log.write_ndjson(std::io::BufWriter::new(file)).map_err(|e| HarnessError::io(&log_path, e))?;

    let rows = run_rows(&RowKey::for_config(&cfg.name, cfg), out.log.records())?;
    let metrics = out_dir.join("metrics.csv");
    write_csv(&metrics, &rows)?;

    let mut manifest = Manifest::new(&cfg.name);
    manifest.config = Some(cfg.clone());
    manifest.runs.push(RunEntry {
        scenario_id: cfg.name.clone(),
        config_hash: config_hash(cfg),
        log_hash: out.log_hash.clone(),
        events: out.log.len(),
    });
    manifest.files = vec!["events.ndjson".into(), "metrics.csv".into()];
    let manifest = manifest.write(out_dir)?;
    Ok(RunArtifacts { log: log_path, metrics, manifest, log_hash: out.log_hash })
}

/// Runs a preset grid and writes one CSV per figure plus a manifest.
pub fn cmd_grid(preset: &str, out_dir: &Path, seed: Option<u64>) -> Result<GridOutcome, HarnessError> {
    let preset: Preset = preset.parse()?;
    let mut grid = run_grid(preset, seed.unwrap_or(defaults::DEFAULT_SEED))?;
    ensure_dir(out_dir)?;
    for (file, rows) in &grid.files {
        write_csv(&out_dir.join(file), rows)?;
        grid.manifest.files.push(file.to_string());
    }
    grid.manifest.write(out_dir)?;
    Ok(grid)
}

pub fn read_log(path: &Path) -> Result<EventLog, HarnessError> {
    let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(EventLog::read_ndjson(BufReader::new(file))?)
}

/// Re-verifies a log written by a previous run. Any disagreement with the
/// logged verdicts is an error.
pub fn cmd_verify(log_path: &Path) -> Result<VerifyReport, HarnessError> {
    let log = read_log(log_path)?;
    let report = verify_log(&log)?;
    if !report.is_consistent() {
        return Err(HarnessError::VerdictMismatch(report.mismatches.len()));
    }
    Ok(report)
}
