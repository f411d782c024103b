//! Tabular Q-learning: tables, the one-step update and epsilon-greedy
//! exploration.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearningError {
    #[error("Q-table needs at least one state and one action (got {states}x{actions})")]
    EmptyTable { states: usize, actions: usize },
    #[error("learning rate must lie in (0, 1], got {0}")]
    LearningRate(f64),
    #[error("discount must lie in [0, 1), got {0}")]
    Discount(f64),
    #[error("epsilon must lie in [0, 1], got {0}")]
    Epsilon(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    values: Vec<f64>,
    num_states: usize,
    num_actions: usize,
    learning_rate: f64,
    discount: f64,
}

impl QTable {
    /// Zero-initialised table.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        learning_rate: f64,
        discount: f64,
    ) -> Result<Self, LearningError> {
        if num_states == 0 || num_actions == 0 {
            return Err(LearningError::EmptyTable {
                states: num_states,
                actions: num_actions,
            });
        }
        if !(learning_rate > 0.0 && learning_rate <= 1.0) {
            return Err(LearningError::LearningRate(learning_rate));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(LearningError::Discount(discount));
        }
        Ok(Self {
            values: vec![0.0; num_states * num_actions],
            num_states,
            num_actions,
            learning_rate,
            discount,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    fn index(&self, state: usize, action: usize) -> usize {
        assert!(
            state < self.num_states && action < self.num_actions,
            "Q-table index ({state}, {action}) outside {}x{}",
            self.num_states,
            self.num_actions
        );
        state * self.num_actions + action
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[self.index(state, action)]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        assert!(value.is_finite(), "Q-values must stay finite");
        let i = self.index(state, action);
        self.values[i] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let start = self.index(state, 0);
        &self.values[start..start + self.num_actions]
    }

    /// Largest value in the row of `state`.
    pub fn greedy_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Highest-valued action of `state`; ties go to the lowest index.
    pub fn greedy_action(&self, state: usize) -> usize {
        argmax(self.row(state))
    }

    /// `Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))`.
    pub fn update(&mut self, state: usize, action: usize, reward: f64, next_state: usize) {
        assert!(reward.is_finite(), "reward must be finite");
        let target = reward + self.discount * self.greedy_value(next_state);
        let i = self.index(state, action);
        let old = self.values[i];
        self.values[i] = (1.0 - self.learning_rate) * old + self.learning_rate * target;
    }

    /// Flat `state,action,value` snapshot with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,action,value\n");
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let _ = writeln!(out, "{s},{a},{:?}", self.get(s, a));
            }
        }
        out
    }
}

/// Index of the first maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn q_update(table: &mut QTable, state: usize, action: usize, reward: f64, next_state: usize) {
    table.update(state, action, reward, next_state);
}

pub fn greedy_value(table: &QTable, state: usize) -> f64 {
    table.greedy_value(state)
}

/// Fixed-epsilon exploration that switches off after `horizon` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationPolicy {
    epsilon: f64,
    horizon: Option<u64>,
}

impl ExplorationPolicy {
    pub fn new(epsilon: f64, horizon: Option<u64>) -> Result<Self, LearningError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(LearningError::Epsilon(epsilon));
        }
        Ok(Self { epsilon, horizon })
    }

    pub fn greedy() -> Self {
        Self {
            epsilon: 0.0,
            horizon: None,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_active(&self, step: u64) -> bool {
        self.epsilon > 0.0 && self.horizon.is_none_or(|h| step < h)
    }

    /// Flip the exploration coin for `step`. After the horizon no random
    /// number is drawn at all.
    pub fn explore<R: Rng + ?Sized>(&self, step: u64, rng: &mut R) -> bool {
        self.is_active(step) && rng.random::<f64>() < self.epsilon
    }
}

/// Uniformly random action with probability epsilon, otherwise the greedy
/// action of `state`.
pub fn epsilon_greedy<R: Rng + ?Sized>(
    table: &QTable,
    state: usize,
    policy: &ExplorationPolicy,
    step: u64,
    rng: &mut R,
) -> usize {
    if policy.explore(step, rng) {
        rng.random_range(0..table.num_actions())
    } else {
        table.greedy_action(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn update_collapses_to_reward() {
        let mut q = QTable::new(2, 2, 1.0, 0.0).unwrap();
        q.update(0, 1, 1.0, 1);
        assert_eq!(q.get(0, 1), 1.0);
    }

    #[test]
    fn update_with_default_rates() {
        let mut q = QTable::new(2, 2, 0.9, 0.5).unwrap();
        q.update(0, 0, 1.0, 1);
        assert!((q.get(0, 0) - 0.9).abs() < 1e-15);
        // Only one cell changed.
        assert_eq!(q.get(0, 1), 0.0);
        assert_eq!(q.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn zero_reward_is_fixed_point() {
        let mut q = QTable::new(3, 3, 0.9, 0.5).unwrap();
        let before = q.clone();
        q.update(2, 1, 0.0, 0);
        assert_eq!(q, before);
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn out_of_range_update_panics() {
        let mut q = QTable::new(2, 2, 0.9, 0.5).unwrap();
        q.update(2, 0, 1.0, 0);
    }

    #[test]
    fn greedy_choice_and_ties() {
        let mut q = QTable::new(1, 3, 0.9, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let policy = ExplorationPolicy::greedy();
        assert_eq!(epsilon_greedy(&q, 0, &policy, 0, &mut rng), 0);
        q.set(0, 1, 5.0);
        q.set(0, 2, 1.0);
        assert_eq!(epsilon_greedy(&q, 0, &policy, 0, &mut rng), 1);
        assert_eq!(q.greedy_value(0), 5.0);
    }

    #[test]
    fn greedy_value_of_negative_row() {
        let mut q = QTable::new(1, 2, 0.9, 0.5).unwrap();
        q.set(0, 0, -2.0);
        q.set(0, 1, -2.0);
        assert_eq!(q.greedy_value(0), -2.0);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let q = QTable::new(1, 3, 0.9, 0.5).unwrap();
        let policy = ExplorationPolicy::new(1.0, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 3];
        let draws = 100_000;
        for _ in 0..draws {
            counts[epsilon_greedy(&q, 0, &policy, 0, &mut rng)] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn exploration_stops_at_horizon() {
        let policy = ExplorationPolicy::new(0.5, Some(10)).unwrap();
        assert!(policy.is_active(9));
        assert!(!policy.is_active(10));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let before = rng.clone();
        assert!(!policy.explore(10, &mut rng));
        assert_eq!(rng, before, "no draw after the horizon");
    }

    #[test]
    fn constructor_validation() {
        assert!(QTable::new(0, 3, 0.5, 0.5).is_err());
        assert!(QTable::new(1, 0, 0.5, 0.5).is_err());
        assert_eq!(QTable::new(1, 1, 0.0, 0.5), Err(LearningError::LearningRate(0.0)));
        assert_eq!(QTable::new(1, 1, 0.5, 1.0), Err(LearningError::Discount(1.0)));
        assert!(ExplorationPolicy::new(1.5, None).is_err());
    }

    #[test]
    fn csv_snapshot() {
        let mut q = QTable::new(1, 2, 0.9, 0.5).unwrap();
        q.set(0, 1, 0.25);
        assert_eq!(q.to_csv(), "state,action,value\n0,0,0.0\n0,1,0.25\n");
    }
}
