use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::config::SimConfig;
use super::engine::{run_episode, SimError};
use super::kpi::{Estimate, RunReport, SCALAR_METRICS};

/// Seeds of an experiment: `base, base + 1, ...`.
pub fn run_seeds(base: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|k| base.wrapping_add(k)).collect()
}

/// Aggregated result of repeated runs of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub algorithm: String,
    pub urllc_load_mbps: f64,
    pub embb_load_mbps: f64,
    pub seeds: Vec<u64>,
    pub metrics: BTreeMap<String, Estimate>,
    pub runs: Vec<RunReport>,
}

impl ExperimentReport {
    pub fn from_runs(config: &SimConfig, runs: Vec<RunReport>) -> Self {
        let metrics = SCALAR_METRICS
            .iter()
            .map(|&m| {
                let values: Vec<f64> = runs.iter().map(|r| r.metric(m).expect("known metric")).collect();
                (m.to_string(), Estimate::from_samples(&values))
            })
            .collect();
        Self {
            algorithm: config.algorithm.to_string(),
            urllc_load_mbps: config.urllc_load_mbps,
            embb_load_mbps: config.embb_load_mbps,
            seeds: runs.iter().map(|r| r.seed).collect(),
            metrics,
            runs,
        }
    }

    pub fn metric(&self, name: &str) -> Option<&Estimate> {
        self.metrics.get(name)
    }
}

/// Run the given seeds in parallel and aggregate. The first failing seed (in
/// seed order) fails the experiment.
pub fn run_experiment_with_seeds(config: &SimConfig, seeds: &[u64]) -> Result<ExperimentReport, SimError> {
    let results: Vec<Result<RunReport, SimError>> = seeds
        .par_iter()
        .map(|&seed| {
            run_episode(config, seed).map_err(|e| SimError::Run {
                seed,
                source: Box::new(e),
            })
        })
        .collect();
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport::from_runs(config, runs))
}

/// `config.runs` runs from seeds derived from `config.seed`.
pub fn run_experiment(config: &SimConfig) -> Result<ExperimentReport, SimError> {
    run_experiment_with_seeds(config, &run_seeds(config.seed, config.runs))
}
