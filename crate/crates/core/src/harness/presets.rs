//! Named scenario grids, one per evaluation figure.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::report::{config_hash, run_rows, CsvRow, Manifest, RowKey, RunEntry};
use super::HarnessError;
use crate::codec::Scheme;
use crate::metrics::{packet_loss_series, pgt_series};
use crate::sim::{run, LossScope, ScenarioConfig, TopologySpec};
use crate::types::NodeId;

/// Packet intervals of the data-rate sweep, seconds.
pub const INTERVALS_S: [f64; 4] = [10.0, 20.0, 30.0, 40.0];
/// Forwarder counts of the hop sweep.
pub const HOPS: std::ops::RangeInclusive<u8> = 1..=7;
pub const SOURCE_COUNTS: [u8; 3] = [1, 3, 5];
pub const MALICIOUS_RATES: [f64; 4] = [0.0, 0.03, 0.06, 0.09];
pub const NATURAL_LOSS: f64 = 0.01;
pub const MALICIOUS_NODE: u8 = 3;
/// Seeds averaged per malicious rate.
pub const PDDR_SEEDS: u64 = 10;
/// Packets per PDDR run.
pub const PDDR_PACKETS: u32 = 20_000;
/// Round length used by the drop-detection preset.
pub const PDDR_INTERVAL_I: u32 = 4;
pub const LOSS_SERIES_WINDOW: u64 = 100;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig7,
    Fig8,
    Fig9,
    Fig11,
    Fig12,
    Fig13,
    Fig14,
}

impl Preset {
    pub const ALL: [Preset; 7] =
        [Preset::Fig7, Preset::Fig8, Preset::Fig9, Preset::Fig11, Preset::Fig12, Preset::Fig13, Preset::Fig14];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Fig11 => "fig11",
            Preset::Fig12 => "fig12",
            Preset::Fig13 => "fig13",
            Preset::Fig14 => "fig14",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Preset::Fig7 => "network energy and per-node power with duty cycling, hops x data rate",
            Preset::Fig8 => "per-node power, plain routing vs routing-pair provenance, with duty cycling",
            Preset::Fig9 => "per-node power without duty cycling, hops x data rate",
            Preset::Fig11 => "provenance size of each scheme over hop counts",
            Preset::Fig12 => "provenance size over 1, 3 and 5 sources",
            Preset::Fig13 => "drop detection rate and cumulative loss under a malicious forwarder",
            Preset::Fig14 => "provenance generation time, plain routing vs routing-pair provenance",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|p| p.name()).collect()
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::UnknownPreset { name: s.to_string(), known: Self::names().join(", ") })
    }
}

/// One run of a grid.
#[derive(Debug, Clone)]
pub struct Job {
    pub scenario_id: String,
    pub config: ScenarioConfig,
    /// CSV file the run's rows go to.
    pub file: &'static str,
}

fn chain(forwarders: u8, scheme: Scheme, interval_s: f64, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(TopologySpec::Linear { forwarders });
    cfg.scheme = scheme;
    cfg.packet_interval_s = interval_s;
    cfg.adversary.rng_seed = seed;
    cfg
}

/// The malicious-forwarder scenario: an 8-hop chain with `rate` drops at
/// node 3 on top of 1% end-to-end natural loss.
pub fn drop_attack_config(rate: f64, seed: u64, packets: u32, interval_i: u32) -> ScenarioConfig {
    let mut cfg = chain(7, Scheme::Pppt, 10.0, seed);
    cfg.name = format!("drop-attack-{rate}");
    cfg.sim_duration_s = packets as f64 * cfg.packet_interval_s;
    cfg.interval_i = interval_i;
    cfg.natural_loss_scope = LossScope::Path;
    cfg.adversary.natural_loss_rate = NATURAL_LOSS;
    if rate > 0.0 {
        cfg.adversary.malicious_node = Some(NodeId::from_raw(MALICIOUS_NODE));
        cfg.adversary.malicious_drop_rate = rate;
    }
    cfg
}

pub fn jobs(preset: Preset, seed: u64) -> Vec<Job> {
    let mut out = Vec::new();
    let mut push = |scenario_id: String, mut config: ScenarioConfig, file| {
        config.name = scenario_id.clone();
        out.push(Job { scenario_id, config, file });
    };
    match preset {
        Preset::Fig7 | Preset::Fig9 => {
            let (file, dc) = if preset == Preset::Fig7 { ("fig7.csv", true) } else { ("fig9.csv", false) };
            for h in HOPS {
                for i in INTERVALS_S {
                    let mut cfg = chain(h, Scheme::Pppt, i, seed);
                    cfg.duty_cycling = dc;
                    push(format!("{preset}-h{h}-i{i}"), cfg, file);
                }
            }
        }
        Preset::Fig8 => {
            for scheme in [Scheme::None, Scheme::Pppt] {
                for h in HOPS {
                    for i in INTERVALS_S {
                        push(format!("fig8-{scheme}-h{h}-i{i}"), chain(h, scheme, i, seed), "fig8.csv");
                    }
                }
            }
        }
        Preset::Fig11 => {
            for scheme in [Scheme::Pppt, Scheme::Pid, Scheme::Bf] {
                for h in HOPS {
                    push(format!("fig11-{scheme}-h{h}"), chain(h, scheme, 10.0, seed), "fig11.csv");
                }
            }
        }
        Preset::Fig12 => {
            for scheme in [Scheme::Pppt, Scheme::Bf] {
                for n in SOURCE_COUNTS {
                    let mut cfg = chain(1, scheme, 10.0, seed);
                    cfg.topology = TopologySpec::Branches { branches: n, depth: 3 };
                    push(format!("fig12-{scheme}-src{n}"), cfg, "fig12.csv");
                }
            }
        }
        Preset::Fig13 => {
            for rate in MALICIOUS_RATES {
                for s in seed..seed + PDDR_SEEDS {
                    let cfg = drop_attack_config(rate, s, PDDR_PACKETS, PDDR_INTERVAL_I);
                    push(format!("fig13-m{rate}-s{s}"), cfg, "pddr.csv");
                }
            }
        }
        Preset::Fig14 => {
            for scheme in [Scheme::None, Scheme::Pppt] {
                for h in HOPS {
                    push(format!("fig14-{scheme}-h{h}"), chain(h, scheme, 10.0, seed), "fig14.csv");
                }
            }
        }
    }
    out
}

/// Rows and bookkeeping for an executed grid, grouped by output file in
/// first-use order.
#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub preset: Preset,
    pub files: Vec<(&'static str, Vec<CsvRow>)>,
    pub manifest: Manifest,
}

impl GridOutcome {
    pub fn rows(&self, file: &str) -> &[CsvRow] {
        self.files.iter().find(|(f, _)| *f == file).map_or(&[], |(_, r)| r.as_slice())
    }

    fn push(&mut self, file: &'static str, rows: Vec<CsvRow>) {
        match self.files.iter_mut().find(|(f, _)| *f == file) {
            Some((_, existing)) => existing.extend(rows),
            None => self.files.push((file, rows)),
        }
    }
}

struct JobOutput {
    file: &'static str,
    rows: Vec<CsvRow>,
    extra: Vec<(&'static str, Vec<CsvRow>)>,
    entry: RunEntry,
}

fn execute(preset: Preset, job: &Job) -> Result<JobOutput, HarnessError> {
    let out = run(&job.config)?;
    let records = out.log.records();
    let key = RowKey::for_config(&job.scenario_id, &job.config);
    let mut rows = run_rows(&key, records)?;
    let mut extra = Vec::new();
    match preset {
        Preset::Fig12 => {
            let sources = job.config.resolved_sources(&job.config.validate()?);
            rows.push(key.row("sources", sources.len() as f64));
        }
        Preset::Fig13 => {
            rows.push(key.row("malicious_rate", job.config.adversary.malicious_drop_rate));
            let series = packet_loss_series(records, LOSS_SERIES_WINDOW)?;
            let points = series.iter().map(|p| key.row(format!("loss_rate@{}", p.sent), p.rate)).collect();
            extra.push(("loss_series.csv", points));
        }
        Preset::Fig14 => {
            let pgt = pgt_series(records);
            for (i, v) in pgt.per_hop_min.iter().enumerate() {
                rows.push(key.row(format!("pgt_hop{i}_min"), *v));
            }
        }
        _ => {}
    }
    let entry = RunEntry {
        scenario_id: job.scenario_id.clone(),
        config_hash: config_hash(&job.config),
        log_hash: out.log_hash,
        events: records.len(),
    };
    Ok(JobOutput { file: job.file, rows, extra, entry })
}

/// Runs every job of the preset (in parallel) and aggregates in job order.
pub fn run_grid(preset: Preset, seed: u64) -> Result<GridOutcome, HarnessError> {
    let jobs = jobs(preset, seed);
    let outputs: Vec<JobOutput> = jobs.par_iter().map(|j| execute(preset, j)).collect::<Result<_, _>>()?;
    let mut grid = GridOutcome { preset, files: Vec::new(), manifest: Manifest::new(preset.name()) };
    for o in outputs {
        grid.push(o.file, o.rows);
        for (f, rows) in o.extra {
            grid.push(f, rows);
        }
        grid.manifest.runs.push(o.entry);
    }
    if preset == Preset::Fig13 {
        let means = pddr_means(grid.rows("pddr.csv"));
        grid.push("pddr.csv", means);
    }
    Ok(grid)
}

/// Seed-averaged PDDR per malicious rate.
fn pddr_means(rows: &[CsvRow]) -> Vec<CsvRow> {
    MALICIOUS_RATES
        .iter()
        .map(|rate| {
            let prefix = format!("fig13-m{rate}-s");
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.metric == "pddr" && r.scenario_id.starts_with(&prefix))
                .map(|r| r.value)
                .collect();
            let template = rows.iter().find(|r| r.scenario_id.starts_with(&prefix)).expect("runs for every rate");
            CsvRow {
                scenario_id: format!("fig13-m{rate}"),
                metric: "pddr_mean".into(),
                value: vals.iter().sum::<f64>() / vals.len() as f64,
                ..template.clone()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        let err = "fig10".parse::<Preset>().unwrap_err();
        assert!(err.to_string().contains("fig13"), "{err}");
    }

    #[test]
    fn grids_cover_the_sweeps() {
        assert_eq!(jobs(Preset::Fig7, 1).len(), 28);
        assert_eq!(jobs(Preset::Fig8, 1).len(), 56);
        assert_eq!(jobs(Preset::Fig11, 1).len(), 21);
        assert_eq!(jobs(Preset::Fig12, 1).len(), 6);
        assert_eq!(jobs(Preset::Fig13, 1).len(), 40);
        for j in jobs(Preset::Fig7, 1) {
            assert_eq!(j.config.sim_duration_s, 600.0);
            assert_eq!(j.config.payload_bytes, 200);
            j.config.validate().unwrap();
        }
    }
}
