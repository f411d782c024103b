use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("game needs at least one agent with at least one action")]
    Empty,
    #[error("agent {agent} payoff table has {found} entries, expected {expected}")]
    PayoffShape {
        agent: usize,
        expected: usize,
        found: usize,
    },
    #[error("feasibility mask has {found} entries, expected {expected}")]
    MaskShape { expected: usize, found: usize },
    #[error("no joint action is feasible")]
    NothingFeasible,
    #[error("agent {agent} has a non-finite payoff at joint action {joint}")]
    NonFinite { agent: usize, joint: usize },
    #[error("malformed game text: {0}")]
    Parse(String),
}

/// Finite normal-form game over a joint action space with a feasibility mask.
///
/// Joint actions are indexed row-major: the last agent's action varies
/// fastest. For two agents with `n0` and `n1` actions the joint index of
/// `(a0, a1)` is `a0 * n1 + a1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGame {
    actions_per_agent: Vec<usize>,
    payoff: Vec<Vec<f64>>,
    feasible: Vec<bool>,
}

impl JointGame {
    pub fn new(
        actions_per_agent: Vec<usize>,
        payoff: Vec<Vec<f64>>,
        feasible: Vec<bool>,
    ) -> Result<Self, GameError> {
        if actions_per_agent.is_empty() || actions_per_agent.iter().any(|&n| n == 0) {
            return Err(GameError::Empty);
        }
        let size: usize = actions_per_agent.iter().product();
        if payoff.len() != actions_per_agent.len() {
            return Err(GameError::PayoffShape {
                agent: payoff.len(),
                expected: size,
                found: 0,
            });
        }
        for (agent, table) in payoff.iter().enumerate() {
            if table.len() != size {
                return Err(GameError::PayoffShape {
                    agent,
                    expected: size,
                    found: table.len(),
                });
            }
            if let Some(joint) = table.iter().position(|v| !v.is_finite()) {
                return Err(GameError::NonFinite { agent, joint });
            }
        }
        if feasible.len() != size {
            return Err(GameError::MaskShape {
                expected: size,
                found: feasible.len(),
            });
        }
        if !feasible.iter().any(|&f| f) {
            return Err(GameError::NothingFeasible);
        }
        Ok(Self {
            actions_per_agent,
            payoff,
            feasible,
        })
    }

    /// Game with every joint action feasible.
    pub fn unmasked(actions_per_agent: Vec<usize>, payoff: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let size = actions_per_agent.iter().product();
        Self::new(actions_per_agent, payoff, vec![true; size])
    }

    /// Two-agent game from row-major bimatrix payoffs.
    pub fn bimatrix(first: &[Vec<f64>], second: &[Vec<f64>]) -> Result<Self, GameError> {
        let rows = first.len();
        let cols = first.first().map_or(0, Vec::len);
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<_>>();
        Self::unmasked(vec![rows, cols], vec![flat(first), flat(second)])
    }

    pub fn num_agents(&self) -> usize {
        self.actions_per_agent.len()
    }

    pub fn actions_per_agent(&self) -> &[usize] {
        &self.actions_per_agent
    }

    pub fn num_joint(&self) -> usize {
        self.feasible.len()
    }

    pub fn is_feasible(&self, joint: usize) -> bool {
        self.feasible[joint]
    }

    pub fn feasible_mask(&self) -> &[bool] {
        &self.feasible
    }

    pub fn payoff(&self, agent: usize, joint: usize) -> f64 {
        self.payoff[agent][joint]
    }

    pub fn payoff_sum(&self, joint: usize) -> f64 {
        self.payoff.iter().map(|t| t[joint]).sum()
    }

    /// Per-agent action tuple of a joint index.
    pub fn decode(&self, mut joint: usize) -> Vec<usize> {
        let mut out = vec![0; self.num_agents()];
        for (slot, &n) in out.iter_mut().zip(&self.actions_per_agent).rev() {
            *slot = joint % n;
            joint /= n;
        }
        out
    }

    pub fn encode(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .zip(&self.actions_per_agent)
            .fold(0, |acc, (&a, &n)| acc * n + a)
    }

    /// Joint index reached when `agent` alone switches to `action`.
    pub fn deviate(&self, joint: usize, agent: usize, action: usize) -> usize {
        let stride: usize = self.actions_per_agent[agent + 1..].iter().product();
        let current = (joint / stride) % self.actions_per_agent[agent];
        joint - current * stride + action * stride
    }

    /// Add `shift` to every payoff of `agent`.
    pub fn translated(&self, agent: usize, shift: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.payoff[agent] {
            *v += shift;
        }
        out
    }
}

/// Plain-text debug format: a header line `agents <n> actions <a0> <a1> ...`,
/// a `feasible` line of 0/1 flags, then one `payoff <i>` line per agent with
/// row-major values.
impl fmt::Display for JointGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agents {} actions", self.num_agents())?;
        for n in &self.actions_per_agent {
            write!(f, " {n}")?;
        }
        writeln!(f)?;
        write!(f, "feasible")?;
        for &m in &self.feasible {
            write!(f, " {}", u8::from(m))?;
        }
        writeln!(f)?;
        for (i, table) in self.payoff.iter().enumerate() {
            write!(f, "payoff {i}")?;
            for v in table {
                write!(f, " {v:?}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for JointGame {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| GameError::Parse(msg.to_string());
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());

        let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header"))?.split_whitespace().collect();
        if header.len() < 4 || header[0] != "agents" || header[2] != "actions" {
            return Err(bad("header must read `agents <n> actions ...`"));
        }
        let n: usize = header[1].parse().map_err(|_| bad("agent count"))?;
        let actions = header[3..]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| bad("action count")))
            .collect::<Result<Vec<_>, _>>()?;
        if actions.len() != n {
            return Err(bad("action count list does not match agent count"));
        }

        let mask_line = lines.next().ok_or_else(|| bad("missing feasible line"))?;
        let mut mask_tokens = mask_line.split_whitespace();
        if mask_tokens.next() != Some("feasible") {
            return Err(bad("expected `feasible`"));
        }
        let feasible = mask_tokens
            .map(|t| match t {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad("feasible flags must be 0 or 1")),
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut payoff = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines.next().ok_or_else(|| bad("missing payoff line"))?;
            let mut tokens = line.split_whitespace();
            if tokens.next() != Some("payoff") || tokens.next() != Some(i.to_string().as_str()) {
                return Err(bad("payoff lines must be numbered in order"));
            }
            let values = tokens
                .map(|t| t.parse::<f64>().map_err(|_| bad("payoff value")))
                .collect::<Result<Vec<_>, _>>()?;
            payoff.push(values);
        }
        JointGame::new(actions, payoff, feasible)
    }
}

/// Probability distribution over the joint actions of a [`JointGame`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    probabilities: Vec<f64>,
}

impl JointDistribution {
    pub fn new(probabilities: Vec<f64>) -> Self {
        Self { probabilities }
    }

    pub fn point_mass(num_joint: usize, joint: usize) -> Self {
        let mut p = vec![0.0; num_joint];
        p[joint] = 1.0;
        Self::new(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, joint: usize) -> f64 {
        self.probabilities[joint]
    }

    /// Joint actions carrying more than `tol` probability.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Expected payoff sum under this distribution.
    pub fn expected_welfare(&self, game: &JointGame) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(j, p)| p * game.payoff_sum(j))
            .sum()
    }

    /// Checks the simplex and mask invariants within `tol`.
    pub fn is_valid_for(&self, game: &JointGame, tol: f64) -> bool {
        self.probabilities.len() == game.num_joint()
            && (self.probabilities.iter().sum::<f64>() - 1.0).abs() <= tol
            && self.probabilities.iter().all(|&p| (-tol..=1.0 + tol).contains(&p))
            && self
                .probabilities
                .iter()
                .enumerate()
                .all(|(j, &p)| game.is_feasible(j) || p.abs() <= tol)
    }
}
