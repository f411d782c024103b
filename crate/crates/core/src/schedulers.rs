//! Intra-slice proportional fair scheduling plus the two non-equilibrium
//! baselines: priority PF (URLLC first) and a single-table Q-learner over
//! full-budget splits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::learning::{epsilon_greedy, ExplorationPolicy, QTable};
use crate::radio::NUM_GROUPS;

pub const PF_FLOOR_BPS: f64 = 1.0;

/// Exponentially averaged served rate per UE, indexed by global UE id.
#[derive(Debug, Clone, PartialEq)]
pub struct PfState {
    avg_bps: Vec<f64>,
    beta: f64,
}

impl PfState {
    pub fn new(num_ues: usize, beta: f64) -> Self {
        Self {
            avg_bps: vec![PF_FLOOR_BPS; num_ues],
            beta,
        }
    }

    pub fn average(&self, ue: usize) -> f64 {
        self.avg_bps[ue]
    }

    pub fn set_average(&mut self, ue: usize, bps: f64) {
        self.avg_bps[ue] = bps.max(PF_FLOOR_BPS);
    }

    /// `T <- (1 - beta) T + beta * served`, floored.
    pub fn update(&mut self, ue: usize, served_bps: f64) {
        let t = &mut self.avg_bps[ue];
        *t = ((1.0 - self.beta) * *t + self.beta * served_bps).max(PF_FLOOR_BPS);
    }
}

/// Hand each group in `groups` to the backlogged UE with the largest
/// `rate / average`. Ties go to the UE holding fewer groups so far this TTI,
/// then to the lowest UE id. Returns `(group, ue)` pairs; with no backlogged
/// UE nothing is assigned.
pub fn pf_intra_slice<F>(groups: &[usize], backlogged: &[usize], rate_bps: F, pf: &PfState) -> Vec<(usize, usize)>
where
    F: Fn(usize, usize) -> f64,
{
    if backlogged.is_empty() {
        return Vec::new();
    }
    let mut held = vec![0usize; backlogged.len()];
    let mut out = Vec::with_capacity(groups.len());
    for &g in groups {
        let mut best: Option<(usize, f64)> = None;
        for (k, &ue) in backlogged.iter().enumerate() {
            let metric = rate_bps(ue, g) / pf.average(ue);
            best = match best {
                None => Some((k, metric)),
                Some((b, m)) => {
                    let tie = (metric - m).abs() <= 1e-12 * metric.abs().max(m.abs());
                    let wins = if tie {
                        (held[k], ue) < (held[b], backlogged[b])
                    } else {
                        metric > m
                    };
                    Some(if wins { (k, metric) } else { (b, m) })
                }
            };
        }
        let (best, _) = best.expect("at least one backlogged UE");
        held[best] += 1;
        out.push((g, backlogged[best]));
    }
    out
}

/// Priority PF split: URLLC gets `ceil(backlog / mean group bits)` groups,
/// capped at the budget, and eMBB gets the rest. Returns `(embb, urllc)`.
pub fn ppf_allocate(urllc_backlog_bits: f64, mean_group_bits: f64) -> (usize, usize) {
    let urllc = if urllc_backlog_bits <= 0.0 {
        0
    } else if mean_group_bits <= 0.0 {
        NUM_GROUPS
    } else {
        ((urllc_backlog_bits / mean_group_bits).ceil() as usize).min(NUM_GROUPS)
    };
    (NUM_GROUPS - urllc, urllc)
}

/// Weights of the combined reward used by the single-table learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrtqWeights {
    pub embb: f64,
    pub urllc: f64,
}

impl Default for LrtqWeights {
    fn default() -> Self {
        Self { embb: 0.5, urllc: 0.5 }
    }
}

impl LrtqWeights {
    pub fn combine(&self, embb_reward: f64, urllc_reward: f64) -> f64 {
        self.embb * embb_reward + self.urllc * urllc_reward
    }
}

/// Number of full-budget splits.
pub const LRTQ_ACTIONS: usize = NUM_GROUPS + 1;

/// Split for action `k`: `k` groups to eMBB, the rest to URLLC.
pub fn lrtq_split(action: usize) -> (usize, usize) {
    assert!(action < LRTQ_ACTIONS);
    (action, NUM_GROUPS - action)
}

pub fn lrtq_state(urllc_bucket: usize, embb_bucket: usize, buckets: usize) -> usize {
    urllc_bucket * buckets + embb_bucket
}

/// Epsilon-greedy choice over full-budget splits. Returns the action index
/// and its `(embb, urllc)` split.
pub fn lrtq_step<R: Rng + ?Sized>(
    table: &QTable,
    state: usize,
    policy: &ExplorationPolicy,
    step: u64,
    rng: &mut R,
) -> (usize, (usize, usize)) {
    let a = epsilon_greedy(table, state, policy, step, rng);
    (a, lrtq_split(a))
}
