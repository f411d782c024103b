//! Result export, per-run artifacts, sweeps and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radio::topology_dump;
use crate::sim::{
    Algorithm, ConfigError, ExperimentReport, RunReport, SimConfig, SimError, Simulation, TraceRecord,
    SCALAR_METRICS,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(e) => e.category(),
            CliError::Sim(SimError::Solver { .. }) => "NUMERICAL_FAILURE",
            CliError::Sim(_) => "SIMULATION",
            CliError::Io { .. } => "IO",
            CliError::Usage(_) => "USAGE",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Sim(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Both,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "both" => Ok(Self::Both),
            _ => Err(format!("unknown format `{s}` (expected csv, json or both)")),
        }
    }
}

/// Scalar tables written by [`export_results`], one per figure.
pub const FIGURE_TABLES: [(&str, &[&str]); 4] = [
    ("latency.csv", &["urllc_latency_ms"]),
    ("throughput.csv", &["embb_throughput_mbps", "urllc_throughput_mbps"]),
    ("pdr.csv", &["pdr", "urllc_pdr", "embb_pdr"]),
    ("convergence.csv", &["convergence_tti"]),
];

fn csv_string<F>(header: &[&str], fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Tidy table `algorithm, urllc_load, metric, mean, ci_low, ci_high`.
/// Missing intervals are empty fields.
pub fn scalar_table(experiments: &[ExperimentReport], metrics: &[&str]) -> String {
    csv_string(&["algorithm", "urllc_load", "metric", "mean", "ci_low", "ci_high"], |w| {
        for e in experiments {
            for &m in metrics {
                let est = e.metric(m).expect("scalar metric");
                w.write_record([
                    e.algorithm.clone(),
                    e.urllc_load_mbps.to_string(),
                    m.to_string(),
                    est.mean.to_string(),
                    opt(est.ci_low()),
                    opt(est.ci_high()),
                ])?;
            }
        }
        Ok(())
    })
}

/// URLLC latency counts pooled over runs, one row per delay value in TTIs.
pub fn latency_histogram(experiments: &[ExperimentReport], tti_ms: f64) -> String {
    csv_string(&["algorithm", "urllc_load", "latency_ttis", "latency_ms", "count"], |w| {
        for e in experiments {
            let mut bins: BTreeMap<u64, u64> = BTreeMap::new();
            for r in &e.runs {
                for &ms in &r.urllc_latency_ms {
                    *bins.entry((ms / tti_ms).round() as u64).or_default() += 1;
                }
            }
            for (ttis, count) in bins {
                w.write_record([
                    e.algorithm.clone(),
                    e.urllc_load_mbps.to_string(),
                    ttis.to_string(),
                    (ttis as f64 * tti_ms).to_string(),
                    count.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn mean_trace(runs: &[RunReport], pick: fn(&RunReport) -> &Vec<f64>) -> Vec<f64> {
    let len = runs.iter().map(|r| pick(r).len()).min().unwrap_or(0);
    (0..len)
        .map(|t| runs.iter().map(|r| pick(r)[t]).sum::<f64>() / runs.len() as f64)
        .collect()
}

/// Per-TTI rewards averaged over runs.
pub fn reward_traces(experiments: &[ExperimentReport]) -> String {
    csv_string(&["algorithm", "urllc_load", "tti", "reward", "urllc_reward", "embb_reward"], |w| {
        for e in experiments {
            let total = mean_trace(&e.runs, |r| &r.reward_trace);
            let urllc = mean_trace(&e.runs, |r| &r.urllc_reward_trace);
            let embb = mean_trace(&e.runs, |r| &r.embb_reward_trace);
            for t in 0..total.len() {
                w.write_record([
                    e.algorithm.clone(),
                    e.urllc_load_mbps.to_string(),
                    t.to_string(),
                    total[t].to_string(),
                    urllc[t].to_string(),
                    embb[t].to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

/// Convergence TTI of every run, for seed-level comparisons.
pub fn convergence_runs(experiments: &[ExperimentReport]) -> String {
    csv_string(&["algorithm", "urllc_load", "seed", "convergence_tti"], |w| {
        for e in experiments {
            for r in &e.runs {
                w.write_record([
                    e.algorithm.clone(),
                    e.urllc_load_mbps.to_string(),
                    r.seed.to_string(),
                    r.convergence_tti.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

/// Every export file name and its contents, in a fixed order.
pub fn export_tables(experiments: &[ExperimentReport], tti_ms: f64, format: ExportFormat) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if matches!(format, ExportFormat::Csv | ExportFormat::Both) {
        out.push(("metrics.csv".to_string(), scalar_table(experiments, &SCALAR_METRICS)));
        for (name, metrics) in FIGURE_TABLES {
            out.push((name.to_string(), scalar_table(experiments, metrics)));
        }
        out.push(("latency_histogram.csv".into(), latency_histogram(experiments, tti_ms)));
        out.push(("reward_traces.csv".into(), reward_traces(experiments)));
        out.push(("convergence_runs.csv".into(), convergence_runs(experiments)));
    }
    if matches!(format, ExportFormat::Json | ExportFormat::Both) {
        let json = serde_json::to_string(experiments).expect("reports serialise");
        out.push(("results.json".into(), json));
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Write the export tables into `dir`; returns the relative paths written.
pub fn export_results(
    experiments: &[ExperimentReport],
    tti_ms: f64,
    format: ExportFormat,
    dir: &Path,
) -> Result<Vec<String>, CliError> {
    let mut written = Vec::new();
    for (name, contents) in export_tables(experiments, tti_ms, format) {
        write_file(dir, &name, &contents)?;
        written.push(name);
    }
    Ok(written)
}

pub fn load_results_json(path: &Path) -> Result<Vec<ExperimentReport>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

/// Text artifacts of one run besides its KPIs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub seed: u64,
    pub topology: String,
    pub qtables_csv: String,
    pub agent_trace_csv: String,
    pub packet_trace_csv: Option<String>,
}

pub fn packet_trace_csv(records: &[TraceRecord]) -> String {
    let mut sorted: Vec<&TraceRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.packet.id);
    csv_string(
        &["id", "cell", "ue", "slice", "arrival", "completion", "d_que", "d_tx", "d_rtx", "dropped", "service_start", "retx"],
        |w| {
            for r in sorted {
                let p = &r.packet;
                let (q, tx, rtx) = match p.delay() {
                    Some(d) => (d.queueing.to_string(), d.transmission.to_string(), d.retransmission.to_string()),
                    None => Default::default(),
                };
                w.write_record([
                    p.id.to_string(),
                    r.cell.to_string(),
                    p.ue.to_string(),
                    p.slice.name().to_string(),
                    p.arrival_tti.to_string(),
                    p.completion_tti.map(|c| c.to_string()).unwrap_or_default(),
                    q,
                    tx,
                    rtx,
                    p.dropped.to_string(),
                    p.service_start_tti.map(|c| c.to_string()).unwrap_or_default(),
                    p.retx_count.to_string(),
                ])?;
            }
            Ok(())
        },
    )
}

fn qtables_csv(sim: &Simulation) -> String {
    let algorithm = sim.config().algorithm;
    csv_string(&["cell", "table", "state", "action", "value"], |w| {
        for c in 0..sim.topology().num_cells() {
            let tables = match algorithm {
                Algorithm::Coqra | Algorithm::Nql => {
                    let (u, e) = sim.agent_tables(c);
                    vec![("urllc", u), ("embb", e)]
                }
                Algorithm::Lrtq => vec![("lrtq", sim.lrtq_table(c))],
                Algorithm::Ppf => Vec::new(),
            };
            for (name, table) in tables {
                for s in 0..table.num_states() {
                    for a in 0..table.num_actions() {
                        w.write_record([
                            c.to_string(),
                            name.to_string(),
                            s.to_string(),
                            a.to_string(),
                            table.get(s, a).to_string(),
                        ])?;
                    }
                }
            }
        }
        Ok(())
    })
}

/// One episode with its topology dump, final Q-tables, per-TTI agent trace
/// and, if asked for, the per-packet trace.
pub fn run_with_artifacts(config: &SimConfig, seed: u64, packet_trace: bool) -> Result<(RunReport, RunArtifacts), SimError> {
    let mut sim = Simulation::new(config, seed);
    if packet_trace {
        sim.record_trace();
    }
    let topology = topology_dump(sim.topology(), sim.channels());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "tti",
        "cell",
        "urllc_state",
        "urllc_action",
        "urllc_reward",
        "embb_state",
        "embb_action",
        "embb_reward",
        "explored",
    ])
    .expect("in-memory write");
    while !sim.is_done() {
        let s = sim.step()?;
        for c in 0..s.splits.len() {
            w.write_record([
                s.tti.to_string(),
                c.to_string(),
                s.states[c].0.to_string(),
                s.splits[c].1.to_string(),
                s.urllc_reward[c].to_string(),
                s.states[c].1.to_string(),
                s.splits[c].0.to_string(),
                s.embb_reward[c].to_string(),
                s.explored[c].to_string(),
            ])
            .expect("in-memory write");
        }
    }
    let agent_trace_csv = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8");
    let packet_trace_csv = sim.trace().map(packet_trace_csv);
    let report = sim.complete();
    let qtables_csv = qtables_csv(&sim);
    Ok((
        report,
        RunArtifacts {
            seed,
            topology,
            qtables_csv,
            agent_trace_csv,
            packet_trace_csv,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub algorithm: String,
    pub urllc_load_mbps: f64,
    pub error: String,
}

/// Everything needed to trace a result directory back to its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Base configuration in `key = value` form.
    pub config: String,
    /// Seeds per grid point, keyed `algorithm@load`.
    pub seeds: BTreeMap<String, Vec<u64>>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
    pub failures: Vec<FailureRecord>,
    pub wall_clock_s: f64,
}

impl RunManifest {
    fn new(command: &str, config: &SimConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.to_text(),
            seeds: BTreeMap::new(),
            artifacts: Vec::new(),
            warnings: Vec::new(),
            failures: Vec::new(),
            wall_clock_s: 0.0,
        }
    }

    pub fn config(&self) -> Result<SimConfig, ConfigError> {
        SimConfig::from_text(&self.config)
    }

    fn write(&mut self, dir: &Path, started: Instant) -> Result<(), CliError> {
        self.artifacts.push("manifest.json".into());
        self.wall_clock_s = started.elapsed().as_secs_f64();
        let json = serde_json::to_string_pretty(self).expect("manifest serialises");
        write_file(dir, "manifest.json", &json)?;
        Ok(())
    }
}

fn grid_key(algorithm: &str, load: f64) -> String {
    format!("{algorithm}@{load}")
}

pub struct RunOptions {
    pub format: ExportFormat,
    pub packet_trace: bool,
}

/// `run`: repeated episodes of one configuration with all artifacts.
pub fn run_command(config: &SimConfig, out: &Path, options: &RunOptions) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let seeds = crate::sim::run_seeds(config.seed, config.runs);
    let results: Vec<Result<(RunReport, RunArtifacts), SimError>> = seeds
        .par_iter()
        .map(|&seed| {
            run_with_artifacts(config, seed, options.packet_trace).map_err(|e| SimError::Run {
                seed,
                source: Box::new(e),
            })
        })
        .collect();
    let mut runs = Vec::new();
    let mut artifacts = Vec::new();
    for r in results {
        let (report, art) = r?;
        runs.push(report);
        artifacts.push(art);
    }
    let experiment = ExperimentReport::from_runs(config, runs);

    let mut manifest = RunManifest::new("run", config);
    manifest
        .seeds
        .insert(grid_key(&experiment.algorithm, experiment.urllc_load_mbps), seeds);
    manifest.artifacts = export_results(std::slice::from_ref(&experiment), config.tti_ms, options.format, out)?;
    for art in &artifacts {
        let dir = format!("runs/seed_{}", art.seed);
        let mut files = vec![
            ("topology.txt", &art.topology),
            ("qtables.csv", &art.qtables_csv),
            ("agent_trace.csv", &art.agent_trace_csv),
        ];
        if let Some(trace) = &art.packet_trace_csv {
            files.push(("packet_trace.csv", trace));
        }
        for (name, contents) in files {
            let rel = format!("{dir}/{name}");
            write_file(out, &rel, contents)?;
            manifest.artifacts.push(rel);
        }
    }
    manifest.write(out, started)?;
    Ok(manifest)
}

/// Drop repeated entries, keeping first occurrences; returns the warnings.
pub fn dedup_grid(loads: &mut Vec<f64>, algorithms: &mut Vec<Algorithm>) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut seen = Vec::new();
    loads.retain(|l| {
        if seen.iter().any(|s: &f64| s.to_bits() == l.to_bits()) {
            warnings.push(format!("duplicate URLLC load {l} ignored"));
            false
        } else {
            seen.push(*l);
            true
        }
    });
    let mut seen_alg = Vec::new();
    algorithms.retain(|a| {
        if seen_alg.contains(a) {
            warnings.push(format!("duplicate algorithm {a} ignored"));
            false
        } else {
            seen_alg.push(*a);
            true
        }
    });
    warnings
}

/// Result of [`sweep`]: completed grid points in grid order plus the manifest.
pub struct SweepOutcome {
    pub experiments: Vec<ExperimentReport>,
    pub manifest: RunManifest,
}

/// Cross product of `algorithms` and `loads`. A failing grid point is recorded
/// in the manifest and the sweep carries on.
pub fn sweep(base: &SimConfig, loads: &[f64], algorithms: &[Algorithm]) -> Result<SweepOutcome, CliError> {
    if loads.is_empty() || algorithms.is_empty() {
        return Err(CliError::Usage("sweep needs at least one load and one algorithm".into()));
    }
    let (mut loads, mut algorithms) = (loads.to_vec(), algorithms.to_vec());
    let warnings = dedup_grid(&mut loads, &mut algorithms);
    let mut manifest = RunManifest::new("sweep", base);
    manifest.warnings = warnings;
    let mut experiments = Vec::new();
    for &algorithm in &algorithms {
        for &load in &loads {
            let mut cfg = base.clone();
            cfg.algorithm = algorithm;
            cfg.urllc_load_mbps = load;
            cfg.validate()?;
            let seeds = crate::sim::run_seeds(cfg.seed, cfg.runs);
            manifest.seeds.insert(grid_key(algorithm.name(), load), seeds.clone());
            match crate::sim::run_experiment_with_seeds(&cfg, &seeds) {
                Ok(e) => experiments.push(e),
                Err(e) => manifest.failures.push(FailureRecord {
                    algorithm: algorithm.to_string(),
                    urllc_load_mbps: load,
                    error: e.to_string(),
                }),
            }
        }
    }
    Ok(SweepOutcome { experiments, manifest })
}

/// `sweep` followed by export into `out`.
pub fn sweep_command(
    base: &SimConfig,
    loads: &[f64],
    algorithms: &[Algorithm],
    out: &Path,
    format: ExportFormat,
) -> Result<SweepOutcome, CliError> {
    let started = Instant::now();
    let mut outcome = sweep(base, loads, algorithms)?;
    outcome.manifest.artifacts = export_results(&outcome.experiments, base.tti_ms, format, out)?;
    outcome.manifest.write(out, started)?;
    Ok(outcome)
}

/// Parse `1,2,3`.
pub fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| CliError::Usage(format!("invalid {what} `{s}`"))))
        .collect()
}
