//! Equilibrium selection over small finite games built from Q-values.
//!
//! The welfare-maximising correlated equilibrium is a linear program over the
//! joint-action simplex; pure Nash equilibria are found by enumeration.

mod correlated;
mod game;
pub mod lp;
mod nash;

use rand::Rng;

pub use correlated::{incentive_rows, min_incentive_slack, solve_correlated_equilibrium, IncentiveRow};
pub use game::{GameError, JointDistribution, JointGame};
pub use lp::{lp_solve, LinearProgram, LpError, LpSolution, Relation};
pub use nash::{find_pure_nash, sequential_best_response};

/// Draw one joint action from `dist`. Zero-probability actions are never
/// returned.
pub fn sample_joint<R: Rng + ?Sized>(dist: &JointDistribution, rng: &mut R) -> usize {
    let p = dist.probabilities();
    let u: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last = None;
    for (j, &pj) in p.iter().enumerate() {
        if pj <= 0.0 {
            continue;
        }
        acc += pj;
        last = Some(j);
        if u < acc {
            return j;
        }
    }
    last.expect("distribution has positive mass")
}
