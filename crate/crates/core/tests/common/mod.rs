//! Independent reference implementations used by the integration tests.
//! None of these call into the solver code they check.

#![allow(dead_code)]

use ranslice::equilibria::JointGame;

pub struct FixtureGame {
    pub game: JointGame,
    pub ce_objective: f64,
    pub nash: Vec<usize>,
}

/// Games from `tests/fixtures/random_games.txt` with their reference
/// welfare-maximising CE value and pure Nash profiles.
pub fn fixture_games() -> Vec<FixtureGame> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/random_games.txt");
    let text = std::fs::read_to_string(path).expect("fixture present");
    text.split("\n\n")
        .filter(|b| !b.trim().is_empty())
        .map(|block| {
            let lines: Vec<&str> = block.lines().collect();
            let game: JointGame = lines[..4].join("\n").parse().expect("fixture game parses");
            let ce_objective = lines[4]
                .strip_prefix("ce_objective ")
                .expect("objective line")
                .parse()
                .expect("objective value");
            let nash = lines[5]
                .strip_prefix("nash")
                .expect("nash line")
                .split_whitespace()
                .map(|t| t.parse().expect("nash index"))
                .collect();
            FixtureGame {
                game,
                ce_objective,
                nash,
            }
        })
        .collect()
}

/// Payoff tables `(first, second)` of a two-agent game as matrices.
pub fn bimatrix(game: &JointGame) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = game.actions_per_agent();
    let (n0, n1) = (n[0], n[1]);
    let table = |agent| (0..n0).map(|a| (0..n1).map(|b| game.payoff(agent, a * n1 + b)).collect()).collect();
    (table(0), table(1))
}

/// Pure Nash profiles of an unmasked bimatrix game by direct deviation checks.
pub fn brute_force_nash(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<usize> {
    let (n0, n1) = (a.len(), a[0].len());
    let mut out = Vec::new();
    for i in 0..n0 {
        for j in 0..n1 {
            let row_ok = (0..n0).all(|k| a[k][j] <= a[i][j]);
            let col_ok = (0..n1).all(|k| b[i][k] <= b[i][j]);
            if row_ok && col_ok {
                out.push(i * n1 + j);
            }
        }
    }
    out
}

/// Largest violation of the obedience constraints, non-negativity and
/// normalisation for a joint distribution of an unmasked bimatrix game.
pub fn ce_violation(a: &[Vec<f64>], b: &[Vec<f64>], p: &[f64]) -> f64 {
    let (n0, n1) = (a.len(), a[0].len());
    let mut worst: f64 = (p.iter().sum::<f64>() - 1.0).abs();
    for &x in p {
        worst = worst.max(-x);
    }
    for i in 0..n0 {
        for k in 0..n0 {
            let gain: f64 = (0..n1).map(|j| p[i * n1 + j] * (a[i][j] - a[k][j])).sum();
            worst = worst.max(-gain);
        }
    }
    for j in 0..n1 {
        for k in 0..n1 {
            let gain: f64 = (0..n0).map(|i| p[i * n1 + j] * (b[i][j] - b[i][k])).sum();
            worst = worst.max(-gain);
        }
    }
    worst
}

/// Solve the square system `m x = rhs` by Gaussian elimination with partial
/// pivoting; `None` when (numerically) singular.
pub fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..n {
                        m[r][c] -= f * m[col][c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

/// Maximum of `c . x` over `{x >= 0, a x <= b}` by enumerating every basic
/// solution. `None` when no vertex is feasible. The region must be bounded.
pub fn vertex_enumeration_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    // All constraints as g x <= h, including -x_j <= 0.
    let mut g: Vec<Vec<f64>> = a.to_vec();
    let mut h: Vec<f64> = b.to_vec();
    for j in 0..n {
        let mut row = vec![0.0; n];
        row[j] = -1.0;
        g.push(row);
        h.push(0.0);
    }
    let m = g.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let sys: Vec<Vec<f64>> = idx.iter().map(|&i| g[i].clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
        if let Some(x) = solve_square(sys, rhs) {
            let feasible = (0..m).all(|i| g[i].iter().zip(&x).map(|(gi, xi)| gi * xi).sum::<f64>() <= h[i] + 1e-9);
            if feasible {
                let v: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // Next n-combination of 0..m.
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < m - n + k {
                idx[k] += 1;
                for l in k + 1..n {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A deterministic two-state, two-action MDP: `next[s][a]`, `reward[s][a]`.
pub struct TinyMdp {
    pub next: [[usize; 2]; 2],
    pub reward: [[f64; 2]; 2],
}

pub const TINY_MDP: TinyMdp = TinyMdp {
    next: [[0, 1], [0, 1]],
    reward: [[1.0, 0.5], [-1.0, 2.0]],
};

/// Optimal action values by value iteration.
pub fn value_iteration(mdp: &TinyMdp, gamma: f64) -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..10_000 {
        let mut next = q;
        for s in 0..2 {
            for a in 0..2 {
                let s2 = mdp.next[s][a];
                next[s][a] = mdp.reward[s][a] + gamma * q[s2][0].max(q[s2][1]);
            }
        }
        let delta = (0..4).map(|k| (next[k / 2][k % 2] - q[k / 2][k % 2]).abs()).fold(0.0, f64::max);
        q = next;
        if delta < 1e-15 {
            break;
        }
    }
    q
}
