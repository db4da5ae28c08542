//! Exact mixed-strategy solution of a finite two-player zero-sum game.
//!
//! Player I (rows) minimizes `p^T L q`, Player II (columns) maximizes it.
//! The matrix is first shifted to `L' = L - min(L) + 1 >= 1`, so the shifted
//! value `v'` is at least one. Substituting `x = p / v'` turns
//!
//! ```text
//! minimize v'  s.t.  sum_i p_i L'_ij <= v'  for all j,  sum_i p_i = 1,  p >= 0
//! ```
//!
//! into the standard-form program
//!
//! ```text
//! maximize sum_i x_i  s.t.  sum_i L'_ij x_i <= 1  for all j,  x >= 0
//! ```
//!
//! whose origin is feasible, so a single phase of dense primal simplex
//! suffices. Pivoting follows Bland's rule (lowest-index entering variable
//! with a positive reduced cost, lowest-index basic variable among tied
//! ratios), which cannot cycle. At the optimum `sum x = 1 / v'`; the
//! column-player strategy is read from the slack reduced costs, which are
//! the dual variables `y` with `q = y v'`.

use serde::{Deserialize, Serialize};

use super::loss::LossMatrix;
use crate::error::{DtbError, Result};

/// Reduced costs above `-OPTIMALITY_TOL` count as non-improving.
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

/// Optimal strategies and value of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    /// Minimizer's distribution over rows (models).
    pub p: Vec<f64>,
    /// Maximizer's distribution over columns (distributions).
    pub q: Vec<f64>,
    pub value: f64,
}

impl GameSolution {
    /// Largest violation of the saddle-point inequalities
    /// `max_j (p^T L)_j <= value` and `min_i (L q)_i >= value`.
    pub fn equilibrium_gap(&self, l: &LossMatrix) -> f64 {
        let col_max = l
            .column_payoffs(&self.p)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let row_min = l.row_payoffs(&self.q).into_iter().fold(f64::INFINITY, f64::min);
        (col_max - self.value).max(self.value - row_min).max(0.0)
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows` constraint rows followed by the objective row; the last
    /// column holds the right-hand side.
    cells: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn objective(&self, c: usize) -> f64 {
        self.at(self.rows, c)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let inv = 1.0 / self.at(pr, pc);
        for c in 0..w {
            self.cells[pr * w + c] *= inv;
        }
        self.cells[pr * w + pc] = 1.0;
        let pivot_row: Vec<f64> = self.cells[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let factor = self.cells[r * w + pc];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.cells[r * w..(r + 1) * w];
            for (cell, &pv) in row.iter_mut().zip(&pivot_row) {
                *cell -= factor * pv;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Bland entering column: lowest index with a negative objective entry.
    fn entering(&self) -> Option<usize> {
        (0..self.cols).find(|&c| self.objective(c) < -OPTIMALITY_TOL)
    }

    /// Minimum-ratio row, ties broken by the lowest basic variable index.
    fn leaving(&self, pc: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let a = self.at(r, pc);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(r) / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= PIVOT_TOL * bratio.abs().max(1.0);
                    if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }
}

/// Solves `min_p max_q p^T L q` over the probability simplices.
///
/// Among several optimal strategy pairs, the one reached by the
/// deterministic Bland pivot sequence is returned.
pub fn solve_zero_sum(l: &LossMatrix) -> Result<GameSolution> {
    let (m, n) = (l.m(), l.n());
    let shift = 1.0 - l.min();
    if !shift.is_finite() || !l.max().is_finite() {
        return Err(DtbError::Numeric("loss matrix is not finite".into()));
    }

    // Variables: x_0..x_{m-1}, then slacks s_0..s_{n-1}; one row per column j.
    let cols = m + n;
    let width = cols + 1;
    let mut cells = vec![0.0; (n + 1) * width];
    for j in 0..n {
        let row = &mut cells[j * width..(j + 1) * width];
        for (i, cell) in row[..m].iter_mut().enumerate() {
            *cell = l.get(i, j) + shift;
        }
        row[m + j] = 1.0;
        row[cols] = 1.0;
    }
    for i in 0..m {
        cells[n * width + i] = -1.0;
    }
    let mut tableau = Tableau {
        rows: n,
        cols,
        cells,
        basis: (m..m + n).collect(),
    };

    // Bland's rule terminates; the cap only guards against numerical drift.
    let max_pivots = 50 * (m + n) * (m + n) + 1000;
    let mut pivots = 0;
    while let Some(pc) = tableau.entering() {
        let pr = tableau.leaving(pc).ok_or_else(|| {
            DtbError::Numeric("unbounded program for a positive matrix game".into())
        })?;
        tableau.pivot(pr, pc);
        pivots += 1;
        if pivots > max_pivots {
            return Err(DtbError::Numeric(format!("simplex exceeded {max_pivots} pivots")));
        }
    }

    let mut x = vec![0.0; m];
    for (r, &var) in tableau.basis.iter().enumerate() {
        if var < m {
            x[var] = tableau.rhs(r).max(0.0);
        }
    }
    let y: Vec<f64> = (0..n).map(|j| tableau.objective(m + j).max(0.0)).collect();

    let p = normalize(&x)?;
    let q = normalize(&y)?;
    let x_total: f64 = x.iter().sum();
    let value = 1.0 / x_total - shift;
    Ok(GameSolution { p, q, value })
}

fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(DtbError::Numeric("degenerate simplex solution".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}
