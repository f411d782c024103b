//! Slice-manager agents: queue-length states, RB-group actions and the two
//! reward functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::equilibria::JointGame;
use crate::learning::QTable;
use crate::radio::NUM_GROUPS;

/// Actions are RB-group counts `0..=NUM_GROUPS`.
pub const NUM_ACTIONS: usize = NUM_GROUPS + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceKind {
    Urllc,
    Embb,
}

impl SliceKind {
    pub const ALL: [SliceKind; 2] = [SliceKind::Urllc, SliceKind::Embb];

    pub fn index(self) -> usize {
        match self {
            SliceKind::Urllc => 0,
            SliceKind::Embb => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SliceKind::Urllc => "urllc",
            SliceKind::Embb => "embb",
        }
    }
}

/// Lower edges of the queue-length buckets. The last bucket is open-ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketEdges(Vec<usize>);

impl Default for BucketEdges {
    fn default() -> Self {
        Self(vec![0, 1, 2, 4, 8, 16, 32])
    }
}

impl BucketEdges {
    /// Edges must start at zero and increase strictly.
    pub fn new(edges: Vec<usize>) -> Option<Self> {
        let ok = edges.first() == Some(&0) && edges.windows(2).all(|w| w[0] < w[1]);
        ok.then_some(Self(edges))
    }

    pub fn edges(&self) -> &[usize] {
        &self.0
    }

    pub fn num_states(&self) -> usize {
        self.0.len()
    }
}

pub fn observe_state(queue_length: usize, edges: &BucketEdges) -> usize {
    edges.0.partition_point(|&e| e <= queue_length) - 1
}

/// Queue-delay reward for the URLLC agent.
///
/// `waits_ms` holds the queueing delay of every packet the URLLC queue held
/// this TTI. An empty queue earns zero. Otherwise the largest wait is
/// normalised by `budget_ms`, capped at one and squared. Each dropped packet
/// costs `drop_penalty`.
pub fn urllc_reward(waits_ms: &[f64], budget_ms: f64, dropped: usize, drop_penalty: f64) -> f64 {
    let base = if waits_ms.is_empty() {
        0.0
    } else {
        let worst = waits_ms.iter().copied().fold(0.0, f64::max);
        let d = (worst / budget_ms).min(1.0);
        1.0 - d * d
    };
    base - drop_penalty * dropped as f64
}

/// Throughput reward for the eMBB agent, `2/pi * atan(Mbps)`.
pub fn embb_reward(throughput_mbps: f64) -> f64 {
    2.0 / PI * throughput_mbps.max(0.0).atan()
}

/// Every `(embb_groups, urllc_groups)` pair within the group budget, in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointActionSpace {
    pairs: Vec<(usize, usize)>,
}

impl Default for JointActionSpace {
    fn default() -> Self {
        Self::new(NUM_GROUPS)
    }
}

impl JointActionSpace {
    pub fn new(budget: usize) -> Self {
        let pairs = (0..=budget)
            .flat_map(|e| (0..=budget - e).map(move |u| (e, u)))
            .collect();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn is_feasible_split(embb_groups: usize, urllc_groups: usize) -> bool {
    embb_groups + urllc_groups <= NUM_GROUPS
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceAgent {
    pub kind: SliceKind,
    pub qtable: QTable,
    pub state: usize,
    pub last_action: usize,
}

impl SliceAgent {
    pub fn new(kind: SliceKind, qtable: QTable) -> Self {
        assert_eq!(qtable.num_actions(), NUM_ACTIONS, "agent table must cover 0..=13 groups");
        Self {
            kind,
            qtable,
            state: 0,
            last_action: 0,
        }
    }

    pub fn q_row(&self) -> &[f64] {
        self.qtable.row(self.state)
    }
}

/// Two-agent game in `(embb, urllc)` order where each agent's payoff is its
/// own Q-value at its current state; pairs over budget are masked.
pub fn build_joint_game(urllc: &SliceAgent, embb: &SliceAgent) -> JointGame {
    let n = NUM_ACTIONS;
    let q_u = urllc.q_row();
    let q_e = embb.q_row();
    let mut pay_e = Vec::with_capacity(n * n);
    let mut pay_u = Vec::with_capacity(n * n);
    let mut feasible = Vec::with_capacity(n * n);
    for e in 0..n {
        for u in 0..n {
            pay_e.push(q_e[e]);
            pay_u.push(q_u[u]);
            feasible.push(is_feasible_split(e, u));
        }
    }
    JointGame::new(vec![n, n], vec![pay_e, pay_u], feasible).expect("agent Q-values are finite")
}

/// `(embb_groups, urllc_groups)` of a joint index from [`build_joint_game`].
pub fn decode_split(joint: usize) -> (usize, usize) {
    (joint / NUM_ACTIONS, joint % NUM_ACTIONS)
}

pub fn encode_split(embb_groups: usize, urllc_groups: usize) -> usize {
    embb_groups * NUM_ACTIONS + urllc_groups
}
