//! Browser bindings for the simulator. Every export takes and returns plain
//! strings; results are JSON objects, failures are `{"error": "..."}`.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use ranslice::equilibria::{find_pure_nash, solve_correlated_equilibrium, JointGame};
use ranslice::radio::{path_loss_db, rb_capacity};
use ranslice::sim::{run_episode, SimConfig};

/// Longest reward trace handed back to the page.
const TRACE_POINTS: usize = 250;

#[derive(Debug, Serialize)]
pub struct EpisodeSummary {
    pub algorithm: String,
    pub seed: u64,
    pub urllc_latency_ms: f64,
    pub embb_throughput_mbps: f64,
    pub urllc_pdr: f64,
    pub embb_pdr: f64,
    pub convergence_tti: u64,
    /// `(tti, reward)` averaged over consecutive blocks.
    pub reward_trace: Vec<(u64, f64)>,
    /// `splits[embb][urllc]` play counts.
    pub splits: Vec<Vec<u64>>,
}

#[derive(Debug, Deserialize)]
pub struct GameInput {
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct GameSolution {
    /// `distribution[row][col]`.
    pub distribution: Vec<Vec<f64>>,
    pub welfare: f64,
    pub nash: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct LinkBudget {
    pub path_loss_db: f64,
    pub rb_capacity_kbps: f64,
}

fn to_json<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn block_means(trace: &[f64], points: usize) -> Vec<(u64, f64)> {
    let block = trace.len().div_ceil(points.max(1)).max(1);
    trace
        .chunks(block)
        .enumerate()
        .map(|(k, c)| ((k * block) as u64, c.iter().sum::<f64>() / c.len() as f64))
        .collect()
}

pub fn run_summary(config_text: &str) -> Result<EpisodeSummary, String> {
    let cfg = SimConfig::from_text(config_text).map_err(|e| e.to_string())?;
    let r = run_episode(&cfg, cfg.seed).map_err(|e| e.to_string())?;
    let side = (r.split_counts.len() as f64).sqrt() as usize;
    Ok(EpisodeSummary {
        algorithm: r.algorithm.clone(),
        seed: r.seed,
        urllc_latency_ms: r.urllc_mean_latency_ms,
        embb_throughput_mbps: r.embb_throughput_mbps,
        urllc_pdr: r.urllc_pdr.value,
        embb_pdr: r.embb_pdr.value,
        convergence_tti: r.convergence_tti,
        reward_trace: block_means(&r.reward_trace, TRACE_POINTS),
        splits: r.split_counts.chunks(side).map(<[u64]>::to_vec).collect(),
    })
}

pub fn game_solution(input_json: &str) -> Result<GameSolution, String> {
    let input: GameInput = serde_json::from_str(input_json).map_err(|e| e.to_string())?;
    let game = JointGame::bimatrix(&input.first, &input.second).map_err(|e| e.to_string())?;
    let dist = solve_correlated_equilibrium(&game).map_err(|e| e.to_string())?;
    let cols = game.actions_per_agent()[1];
    Ok(GameSolution {
        distribution: dist.probabilities().chunks(cols).map(<[f64]>::to_vec).collect(),
        welfare: dist.expected_welfare(&game),
        nash: find_pure_nash(&game).into_iter().map(|j| (j / cols, j % cols)).collect(),
    })
}

pub fn link_budget(distance_km: f64, sinr_db: f64) -> Result<LinkBudget, String> {
    if !(distance_km > 0.0 && distance_km.is_finite()) {
        return Err(format!("distance must be a positive number of km, got {distance_km}"));
    }
    if !sinr_db.is_finite() {
        return Err("SINR must be finite".into());
    }
    Ok(LinkBudget {
        path_loss_db: path_loss_db(distance_km),
        rb_capacity_kbps: rb_capacity(10f64.powf(sinr_db / 10.0)) / 1e3,
    })
}

/// Default configuration in `key = value` form.
#[wasm_bindgen]
pub fn default_config() -> String {
    SimConfig::default().to_text()
}

/// One episode of the configuration in `config_text`.
#[wasm_bindgen]
pub fn simulate(config_text: &str) -> String {
    to_json(run_summary(config_text))
}

/// Welfare-maximising correlated equilibrium and pure Nash profiles of the
/// two-player game `{"first": [[..]], "second": [[..]]}`.
#[wasm_bindgen]
pub fn solve_game(input_json: &str) -> String {
    to_json(game_solution(input_json))
}

/// Path loss at `distance_km` and single-RB capacity at `sinr_db`.
#[wasm_bindgen]
pub fn link(distance_km: f64, sinr_db: f64) -> String {
    to_json(link_budget(distance_km, sinr_db))
}
