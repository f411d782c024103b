use super::game::{JointDistribution, JointGame};
use super::lp::{LinearProgram, LpError, Relation};

/// Coefficients below this magnitude are treated as exact zeros when rows are
/// classified during presolve.
const ZERO_TOL: f64 = 1e-12;

/// One incentive row: `sum_k coeffs[k] * Pr(joints[k]) >= 0`.
#[derive(Debug, Clone)]
pub struct IncentiveRow {
    pub agent: usize,
    pub recommended: usize,
    pub deviation: usize,
    pub terms: Vec<(usize, f64)>,
}

impl IncentiveRow {
    pub fn value(&self, probabilities: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, c)| c * probabilities[j]).sum()
    }
}

/// Every obedience constraint of the game: for each agent, each recommended
/// own action and each alternative, the expected gain from obeying, summed
/// over the opponents' actions for which both the recommended and the
/// deviating joint action are feasible.
pub fn incentive_rows(game: &JointGame) -> Vec<IncentiveRow> {
    let mut rows = Vec::new();
    for agent in 0..game.num_agents() {
        let n = game.actions_per_agent()[agent];
        let stride: usize = game.actions_per_agent()[agent + 1..].iter().product();
        let mut by_action = vec![Vec::new(); n];
        for j in (0..game.num_joint()).filter(|&j| game.is_feasible(j)) {
            by_action[(j / stride) % n].push(j);
        }
        for recommended in 0..n {
            for deviation in (0..n).filter(|&d| d != recommended) {
                let terms = by_action[recommended]
                    .iter()
                    .filter_map(|&j| {
                        let alt = game.deviate(j, agent, deviation);
                        game.is_feasible(alt)
                            .then(|| (j, game.payoff(agent, j) - game.payoff(agent, alt)))
                    })
                    .collect();
                rows.push(IncentiveRow {
                    agent,
                    recommended,
                    deviation,
                    terms,
                });
            }
        }
    }
    rows
}

/// Smallest incentive-row value of `dist`; non-negative means every
/// obedience constraint holds.
pub fn min_incentive_slack(game: &JointGame, dist: &JointDistribution) -> f64 {
    incentive_rows(game)
        .iter()
        .map(|r| r.value(dist.probabilities()))
        .fold(f64::INFINITY, f64::min)
}

/// Welfare-maximising correlated equilibrium.
///
/// With masked joint actions an equilibrium need not exist; that case is
/// reported as [`LpError::Infeasible`].
///
/// Rows whose coefficients are all non-negative are implied by `Pr >= 0` and
/// are dropped; rows whose coefficients are all non-positive force every
/// variable with a negative coefficient to zero. What remains goes to the
/// dense simplex.
pub fn solve_correlated_equilibrium(game: &JointGame) -> Result<JointDistribution, LpError> {
    let num_joint = game.num_joint();
    let mut alive: Vec<bool> = game.feasible_mask().to_vec();
    let mut rows: Vec<Vec<(usize, f64)>> = incentive_rows(game)
        .into_iter()
        .map(|r| {
            r.terms
                .into_iter()
                .filter(|&(_, c)| c.abs() > ZERO_TOL)
                .collect()
        })
        .collect();

    loop {
        let mut changed = false;
        rows.retain(|row| {
            let live = row.iter().filter(|&&(j, _)| alive[j]);
            let (mut pos, mut neg) = (false, false);
            for &(_, c) in live {
                pos |= c > 0.0;
                neg |= c < 0.0;
            }
            if !neg {
                return false;
            }
            if !pos {
                for &(j, c) in row {
                    if c < 0.0 && alive[j] {
                        alive[j] = false;
                        changed = true;
                    }
                }
                return false;
            }
            true
        });
        if !changed {
            break;
        }
    }

    let vars: Vec<usize> = (0..num_joint).filter(|&j| alive[j]).collect();
    if vars.is_empty() {
        return Err(LpError::Infeasible);
    }
    let mut column = vec![usize::MAX; num_joint];
    for (k, &j) in vars.iter().enumerate() {
        column[j] = k;
    }

    let mut lp = LinearProgram::new(vars.iter().map(|&j| game.payoff_sum(j)).collect());
    lp.add_constraint(vec![1.0; vars.len()], Relation::Eq, 1.0);
    for row in &rows {
        let mut coeffs = vec![0.0; vars.len()];
        for &(j, c) in row {
            if alive[j] {
                coeffs[column[j]] = c;
            }
        }
        lp.add_constraint(coeffs, Relation::Ge, 0.0);
    }
    let solution = lp.solve()?;

    let mut probabilities = vec![0.0; num_joint];
    for (k, &j) in vars.iter().enumerate() {
        probabilities[j] = solution.x[k].clamp(0.0, 1.0);
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(LpError::NumericalFailure(format!(
            "distribution sums to {total}"
        )));
    }
    Ok(JointDistribution::new(probabilities))
}
