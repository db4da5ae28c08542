use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EmpiricalDistribution};
use crate::error::{DtbError, Result};
use crate::models::Predictor;

/// Pointwise error between a target and a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorFn {
    #[default]
    Squared,
    Absolute,
}

impl ErrorFn {
    pub fn eval(self, target: f64, prediction: f64) -> f64 {
        match self {
            ErrorFn::Squared => (target - prediction).powi(2),
            ErrorFn::Absolute => (target - prediction).abs(),
        }
    }
}

/// Row-major `m x n` matrix of empirical risks: row `i` is a model, column
/// `j` an empirical distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossMatrix {
    m: usize,
    n: usize,
    entries: Vec<f64>,
}

impl LossMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(DtbError::config("loss matrix needs at least one row and column"));
        }
        if entries.len() != m * n {
            return Err(DtbError::data(format!(
                "loss matrix buffer has {} entries, expected {m}x{n}",
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(DtbError::NonFiniteLoss {
                model: pos / n,
                dist: pos % n,
            });
        }
        Ok(Self { m, n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(DtbError::data("ragged loss matrix rows"));
        }
        Self::new(rows.len(), n, rows.concat())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            entries: self.entries.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `(p^T L)_j` for every column.
    pub fn column_payoffs(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.m).map(|i| p[i] * self.get(i, j)).sum())
            .collect()
    }

    /// `(L q)_i` for every row.
    pub fn row_payoffs(&self, q: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| self.row(i).iter().zip(q).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `L[i][j] = mean over support(mu_j) of error_fn(y, F_i(x))`.
pub fn compute_loss_matrix<P: Predictor>(
    models: &[P],
    dists: &[EmpiricalDistribution],
    data: &Dataset,
    error_fn: ErrorFn,
) -> Result<LossMatrix> {
    if models.is_empty() || dists.is_empty() {
        return Err(DtbError::config("loss matrix needs at least one model and one distribution"));
    }
    for d in dists {
        if d.support.is_empty() {
            return Err(DtbError::data(format!("distribution {} has empty support", d.block)));
        }
        if d.support.parent_len() != data.len() {
            return Err(DtbError::data(format!(
                "distribution {} does not index this dataset",
                d.block
            )));
        }
    }
    let rows: Vec<Vec<f64>> = models
        .par_iter()
        .enumerate()
        .map(|(i, model)| {
            dists
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    let total: f64 = d
                        .support
                        .indices()
                        .iter()
                        .map(|&r| error_fn.eval(data.y(r), model.predict(data.x(r))))
                        .sum();
                    let risk = total / d.support.len() as f64;
                    if risk.is_finite() {
                        Ok(risk)
                    } else {
                        Err(DtbError::NonFiniteLoss { model: i, dist: j })
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    LossMatrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::IndexSet;

    struct Const(f64);

    impl Predictor for Const {
        fn predict(&self, _: &[f64]) -> f64 {
            self.0
        }
        fn n_features(&self) -> usize {
            1
        }
        fn descriptor(&self) -> String {
            format!("const({})", self.0)
        }
    }

    struct Exact;

    impl Predictor for Exact {
        fn predict(&self, x: &[f64]) -> f64 {
            3.0 * x[0]
        }
        fn n_features(&self) -> usize {
            1
        }
        fn descriptor(&self) -> String {
            "exact".into()
        }
    }

    fn dist(block: usize, rows: Vec<usize>, parent: usize) -> EmpiricalDistribution {
        EmpiricalDistribution {
            block,
            support: IndexSet::new(rows, parent).unwrap(),
        }
    }

    #[test]
    fn perfect_model_has_zero_row() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let data = Dataset::from_rows(&rows, (0..6).map(|i| 3.0 * i as f64).collect()).unwrap();
        let dists = vec![dist(0, vec![0, 1], 6), dist(1, vec![2, 5], 6)];
        let l = compute_loss_matrix(&[Exact], &dists, &data, ErrorFn::Squared).unwrap();
        assert_eq!(l.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn constant_zero_model_hand_value() {
        let data = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        let dists = vec![dist(0, vec![0, 1], 2)];
        let sq = compute_loss_matrix(&[Const(0.0)], &dists, &data, ErrorFn::Squared).unwrap();
        assert_eq!(sq.get(0, 0), 1.0);
        let abs = compute_loss_matrix(&[Const(0.5)], &dists, &data, ErrorFn::Absolute).unwrap();
        assert_eq!(abs.get(0, 0), 1.0);
    }

    #[test]
    fn non_finite_prediction_names_the_cell() {
        let data = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![1.0, 2.0]).unwrap();
        let dists = vec![dist(0, vec![0], 2), dist(1, vec![1], 2)];
        let err = compute_loss_matrix(&[Const(1.0), Const(f64::INFINITY)], &dists, &data, ErrorFn::Squared)
            .unwrap_err();
        assert!(matches!(err, DtbError::NonFiniteLoss { model: 1, dist: 0 }));
    }

    #[test]
    fn payoff_helpers() {
        let l = LossMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(l.column_payoffs(&[0.5, 0.5]), vec![2.0, 1.5]);
        assert_eq!(l.row_payoffs(&[1.0, 0.0]), vec![3.0, 1.0]);
        assert_eq!((l.min(), l.max()), (1.0, 3.0));
    }
}
