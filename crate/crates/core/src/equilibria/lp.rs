//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `maximize c·x` subject to linear rows and
//! `0 <= x <= u` (upper bounds optional). Pivoting is deterministic: the same
//! input always yields the same basis.

use thiserror::Error;

/// Reduced costs and primal values below this are treated as zero.
const PIVOT_TOL: f64 = 1e-11;
/// Smallest column entry accepted as a pivot. Entries below it are
/// cancellation noise and pivoting on them destroys the tableau.
const RATIO_TOL: f64 = 1e-9;
/// Phase-one objective above this value means the rows cannot be satisfied.
const INFEASIBLE_TOL: f64 = 1e-9;
/// Largest primal residual accepted on the returned point.
const RESIDUAL_TOL: f64 = 1e-8;
/// Primal slack allowed by the first pass of the ratio test.
const HARRIS_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 100_000;
const BLAND_AFTER: usize = 5_000;
const REINVERT_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    /// Signed violation at `x`: positive values mean the row is broken.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.relation {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub upper_bounds: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("numerical failure in simplex: {0}")]
    NumericalFailure(String),
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            upper_bounds: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width mismatch");
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
        self
    }

    pub fn set_upper_bound(&mut self, var: usize, bound: f64) -> &mut Self {
        self.upper_bounds[var] = Some(bound);
        self
    }

    /// Largest violation over all rows and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let lower = x.iter().map(|v| -v);
        let upper = self
            .upper_bounds
            .iter()
            .zip(x)
            .filter_map(|(u, v)| u.map(|u| v - u));
        rows.chain(lower).chain(upper).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        lp_solve(self)
    }
}

/// Solve `lp` to optimality.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    if lp.objective.iter().any(|c| !c.is_finite()) {
        return Err(LpError::NumericalFailure("non-finite objective".into()));
    }

    // Upper bounds become ordinary rows.
    let mut rows: Vec<Constraint> = lp.constraints.clone();
    for (j, ub) in lp.upper_bounds.iter().enumerate() {
        if let Some(ub) = *ub {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            rows.push(Constraint::new(coeffs, Relation::Le, ub));
        }
    }
    for row in &mut rows {
        if row.coeffs.len() != n || !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
            return Err(LpError::NumericalFailure("malformed constraint row".into()));
        }
        let scale = row.coeffs.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
        if scale > 0.0 {
            row.coeffs.iter_mut().for_each(|a| *a /= scale);
            row.rhs /= scale;
        }
    }

    let mut tableau = Tableau::build(n, &rows);
    tableau.phase_one()?;
    tableau.phase_two(&lp.objective)?;

    let mut x = tableau.refined_primal(n).unwrap_or_else(|| tableau.primal(n));
    for v in &mut x {
        if v.abs() < PIVOT_TOL {
            *v = 0.0;
        }
    }
    let worst = lp.max_violation(&x);
    if worst > RESIDUAL_TOL {
        return Err(LpError::NumericalFailure(format!("residual {worst:e} after pivoting")));
    }
    let objective = lp.evaluate(&x);
    Ok(LpSolution { x, objective })
}

/// Column layout: structural variables, then one slack/surplus per inequality
/// row, then artificials. The last column holds the right-hand side.
struct Tableau {
    rows: Vec<Vec<f64>>,
    /// The rows as built, before any pivot.
    initial: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_cols: usize,
    first_artificial: usize,
    /// Rows dropped after phase one because they were linearly dependent.
    active: Vec<bool>,
}

impl Tableau {
    fn build(n: usize, constraints: &[Constraint]) -> Self {
        let m = constraints.len();
        let num_slack = constraints.iter().filter(|c| c.relation != Relation::Eq).count();

        // Normalise every row to a non-negative right-hand side. Homogeneous
        // `>=` rows are negated so their slack can start in the basis.
        let normalised: Vec<(Vec<f64>, Relation, f64)> = constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 || (c.rhs == 0.0 && c.relation == Relation::Ge) {
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), rel, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs)
                }
            })
            .collect();
        let num_artificial = normalised.iter().filter(|(_, r, _)| *r != Relation::Le).count();

        let first_artificial = n + num_slack;
        let num_cols = first_artificial + num_artificial;
        let mut rows = vec![vec![0.0; num_cols + 1]; m];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut artificial = first_artificial;
        for (i, (coeffs, rel, rhs)) in normalised.into_iter().enumerate() {
            rows[i][..n].copy_from_slice(&coeffs);
            rows[i][num_cols] = rhs;
            match rel {
                Relation::Le => {
                    rows[i][slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    rows[i][slack] = -1.0;
                    slack += 1;
                    rows[i][artificial] = 1.0;
                    basis[i] = artificial;
                    artificial += 1;
                }
                Relation::Eq => {
                    rows[i][artificial] = 1.0;
                    basis[i] = artificial;
                    artificial += 1;
                }
            }
        }
        Self {
            initial: rows.clone(),
            rows,
            basis,
            num_cols,
            first_artificial,
            active: vec![true; m],
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.num_cols]
    }

    fn pivot(&mut self, pivot_row: usize, pivot_col: usize, cost: &mut [f64]) {
        let width = self.num_cols + 1;
        let p = self.rows[pivot_row][pivot_col];
        for v in &mut self.rows[pivot_row] {
            *v /= p;
        }
        let pivot_values = self.rows[pivot_row].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == pivot_row {
                continue;
            }
            let factor = row[pivot_col];
            if factor != 0.0 {
                for k in 0..width {
                    row[k] -= factor * pivot_values[k];
                }
                row[pivot_col] = 0.0;
            }
        }
        let factor = cost[pivot_col];
        if factor != 0.0 {
            for k in 0..width {
                cost[k] -= factor * pivot_values[k];
            }
            cost[pivot_col] = 0.0;
        }
        self.basis[pivot_row] = pivot_col;
    }

    /// Reduced-cost row for maximising `weights` over the current basis.
    /// `cost[j] > 0` means increasing column `j` improves the objective; the
    /// last entry holds the negated objective value.
    fn reduced_costs(&self, weights: &[f64]) -> Vec<f64> {
        let mut cost = weights.to_vec();
        cost.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            if !self.active[i] {
                continue;
            }
            let cb = weights[b];
            if cb != 0.0 {
                for (k, v) in cost.iter_mut().enumerate() {
                    *v -= cb * self.rows[i][k];
                }
            }
        }
        cost
    }

    /// Simplex iterations maximising `weights` over columns `< col_limit`.
    ///
    /// The entering column is the lowest-index improving one. The leaving row
    /// comes from a two-pass ratio test that prefers large pivot elements
    /// among near-ties; after `BLAND_AFTER` pivots it falls back to the plain
    /// smallest-index rule so degenerate cycles cannot persist. The tableau is
    /// rebuilt from the original rows every `REINVERT_EVERY` pivots.
    fn iterate(&mut self, weights: &[f64], col_limit: usize) -> Result<(), LpError> {
        let mut cost = self.reduced_costs(weights);
        for step in 0..MAX_PIVOTS {
            if step > 0 && step % REINVERT_EVERY == 0 && self.reinvert() {
                cost = self.reduced_costs(weights);
            }
            let Some(entering) = (0..col_limit).find(|&j| cost[j] > PIVOT_TOL) else {
                return Ok(());
            };
            let leaving = if step < BLAND_AFTER {
                self.harris_row(entering)
            } else {
                self.bland_row(entering)
            };
            let Some(row) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, entering, &mut cost);
        }
        Err(LpError::NumericalFailure("pivot limit reached".into()))
    }

    fn candidates(&self, col: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.rows.len())
            .filter(move |&i| self.active[i] && self.rows[i][col] > RATIO_TOL)
            .map(move |i| (i, self.rows[i][col], self.rhs(i).max(0.0)))
    }

    fn harris_row(&self, col: usize) -> Option<usize> {
        let bound = self
            .candidates(col)
            .map(|(_, a, b)| (b + HARRIS_TOL) / a)
            .fold(f64::INFINITY, f64::min);
        let mut best: Option<(usize, f64)> = None;
        for (i, a, b) in self.candidates(col) {
            if b / a > bound {
                continue;
            }
            best = match best {
                Some((r, big)) if a < big || (a == big && self.basis[i] > self.basis[r]) => Some((r, big)),
                _ => Some((i, a)),
            };
        }
        best.map(|(i, _)| i)
    }

    fn bland_row(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, a, b) in self.candidates(col) {
            let ratio = b / a;
            best = match best {
                Some((r, m)) if ratio > m + PIVOT_TOL || (ratio >= m - PIVOT_TOL && self.basis[i] > self.basis[r]) => {
                    Some((r, m))
                }
                _ => Some((i, ratio)),
            };
        }
        best.map(|(i, _)| i)
    }

    /// Recompute the tableau for the current basis directly from the
    /// original rows. Returns `false` (tableau untouched) if the basis matrix
    /// is numerically singular.
    fn reinvert(&mut self) -> bool {
        let mut rows = self.initial.clone();
        let mut basis = self.basis.clone();
        let mut done = vec![false; rows.len()];
        let width = self.num_cols + 1;
        for i in 0..self.rows.len() {
            if !self.active[i] {
                done[i] = true;
            }
        }
        let cols: Vec<usize> = (0..self.rows.len()).filter(|&i| self.active[i]).map(|i| self.basis[i]).collect();
        for c in cols {
            let Some(r) = (0..rows.len())
                .filter(|&r| !done[r])
                .max_by(|&p, &q| rows[p][c].abs().total_cmp(&rows[q][c].abs()))
            else {
                return false;
            };
            let p = rows[r][c];
            if p.abs() < RATIO_TOL {
                return false;
            }
            rows[r].iter_mut().for_each(|v| *v /= p);
            let pivot_values = rows[r].clone();
            for (k, row) in rows.iter_mut().enumerate() {
                if k != r && row[c] != 0.0 {
                    let f = row[c];
                    for j in 0..width {
                        row[j] -= f * pivot_values[j];
                    }
                    row[c] = 0.0;
                }
            }
            basis[r] = c;
            done[r] = true;
        }
        self.rows = rows;
        self.basis = basis;
        true
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        if self.first_artificial == self.num_cols {
            return Ok(());
        }
        let mut weights = vec![0.0; self.num_cols];
        for w in &mut weights[self.first_artificial..] {
            *w = -1.0;
        }
        match self.iterate(&weights, self.num_cols) {
            Ok(()) => {}
            Err(LpError::Unbounded) => {
                return Err(LpError::NumericalFailure("phase one reported unbounded".into()))
            }
            Err(e) => return Err(e),
        }
        let infeasibility: f64 = (0..self.rows.len())
            .filter(|&i| self.active[i] && self.basis[i] >= self.first_artificial)
            .map(|i| self.rhs(i))
            .sum();
        if infeasibility > INFEASIBLE_TOL {
            return Err(LpError::Infeasible);
        }

        // Drive remaining (zero-level) artificials out of the basis.
        let mut scratch = vec![0.0; self.num_cols + 1];
        for i in 0..self.rows.len() {
            if self.basis[i] < self.first_artificial {
                continue;
            }
            match (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > 1e-9) {
                Some(j) => self.pivot(i, j, &mut scratch),
                None => self.active[i] = false,
            }
        }
        Ok(())
    }

    fn phase_two(&mut self, objective: &[f64]) -> Result<(), LpError> {
        let mut weights = vec![0.0; self.num_cols];
        weights[..objective.len()].copy_from_slice(objective);
        self.iterate(&weights, self.first_artificial)
    }

    /// Basic variable values recomputed from the unpivoted rows, which
    /// discards rounding accumulated over the pivots. `None` if the basis
    /// matrix is numerically singular.
    fn refined_primal(&self, n: usize) -> Option<Vec<f64>> {
        let rows: Vec<usize> = (0..self.rows.len()).filter(|&i| self.active[i]).collect();
        let cols: Vec<usize> = rows.iter().map(|&i| self.basis[i]).collect();
        let k = rows.len();
        let mut a: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| {
                let mut r: Vec<f64> = cols.iter().map(|&c| self.initial[i][c]).collect();
                r.push(self.initial[i][self.num_cols]);
                r
            })
            .collect();
        for col in 0..k {
            let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
            if a[piv][col].abs() < RATIO_TOL {
                return None;
            }
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    if f != 0.0 {
                        for c in col..=k {
                            a[r][c] -= f * a[col][c];
                        }
                    }
                }
            }
        }
        let mut x = vec![0.0; n];
        for (p, &c) in cols.iter().enumerate() {
            if c < n {
                x[c] = a[p][k] / a[p][p];
            }
        }
        Some(x)
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if self.active[i] && b < n {
                x[b] = self.rhs(i);
            }
        }
        x
    }
}
