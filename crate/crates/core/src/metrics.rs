//! Test-set metrics: overall squared loss and the worst loss over
//! target-sorted folds, plus the uniform-average baseline.

use serde::{Deserialize, Serialize};

use crate::error::{DtbError, Result};
use crate::models::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Dt,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall_loss: f64,
    pub max_fold_loss: f64,
    pub fold_losses: Vec<f64>,
    pub n_folds: usize,
    pub ensemble_kind: EnsembleKind,
}

impl EvalReport {
    pub fn evaluate(pred: &[f64], truth: &[f64], n_folds: usize, ensemble_kind: EnsembleKind) -> Result<Self> {
        let overall_loss = overall_mse(pred, truth)?;
        let (max_fold_loss, fold_losses) = max_fold_loss(pred, truth, n_folds)?;
        Ok(Self {
            overall_loss,
            max_fold_loss,
            fold_losses,
            n_folds,
            ensemble_kind,
        })
    }
}

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(DtbError::DimensionMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(DtbError::data("cannot score an empty prediction vector"));
    }
    Ok(())
}

/// `(1/N) sum (pred - truth)^2`.
pub fn overall_mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    let total: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok(total / pred.len() as f64)
}

/// Per-fold MSE over `n_folds` contiguous bins of the points sorted by
/// truth (ties by position). Bins hold `floor(N / n_folds)` points; the
/// remainder (highest targets) joins the last bin. Returns the maximum and
/// the per-fold vector.
pub fn max_fold_loss(pred: &[f64], truth: &[f64], n_folds: usize) -> Result<(f64, Vec<f64>)> {
    check_pair(pred, truth)?;
    let n = truth.len();
    if n_folds == 0 || n_folds > n {
        return Err(DtbError::config(format!(
            "fold count {n_folds} must lie in 1..={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| truth[a].total_cmp(&truth[b]).then(a.cmp(&b)));
    let size = n / n_folds;
    let folds: Vec<f64> = (0..n_folds)
        .map(|f| {
            let end = if f + 1 == n_folds { n } else { (f + 1) * size };
            let members = &order[f * size..end];
            let total: f64 = members.iter().map(|&i| (pred[i] - truth[i]).powi(2)).sum();
            total / members.len() as f64
        })
        .collect();
    let max = folds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((max, folds))
}

/// Equal-weight average of the model predictions.
pub fn uniform_ensemble_predict<P: Predictor>(models: &[P], x: &[f64]) -> Result<f64> {
    if models.is_empty() {
        return Err(DtbError::config("uniform ensemble needs at least one model"));
    }
    Ok(models.iter().map(|m| m.predict(x)).sum::<f64>() / models.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn mse_hand_cases() {
        let t = [1.0, -2.0, 3.5];
        assert_eq!(overall_mse(&t, &t).unwrap(), 0.0);
        let shifted: Vec<f64> = t.iter().map(|v| v + 1.0).collect();
        assert_eq!(overall_mse(&shifted, &t).unwrap(), 1.0);
        assert!(overall_mse(&[], &[]).is_err());
        assert!(overall_mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn fold_hand_case() {
        let (max, folds) = max_fold_loss(&[1.0, 2.0, 3.0, 0.0], &[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(folds, vec![0.0, 8.0]);
        assert_eq!(max, 8.0);
        let t = [3.0, 1.0, 2.0];
        assert_eq!(max_fold_loss(&t, &t, 3).unwrap().0, 0.0);
        assert!(max_fold_loss(&t, &t, 4).is_err());
        assert!(max_fold_loss(&t, &t, 0).is_err());
    }

    #[test]
    fn remainder_joins_last_fold() {
        // Sorted truth 0..5 in 2 folds: {0,1}, {2,3,4}.
        let truth = [4.0, 0.0, 3.0, 1.0, 2.0];
        let pred = [5.0, 0.0, 3.0, 1.0, 2.0];
        let (_, folds) = max_fold_loss(&pred, &truth, 2).unwrap();
        assert_eq!(folds, vec![0.0, 1.0 / 3.0]);
    }

    #[test]
    fn uniform_baseline() {
        struct C(f64);
        impl Predictor for C {
            fn predict(&self, _: &[f64]) -> f64 {
                self.0
            }
            fn n_features(&self) -> usize {
                1
            }
            fn descriptor(&self) -> String {
                String::new()
            }
        }
        assert_eq!(uniform_ensemble_predict(&[C(3.0)], &[0.0]).unwrap(), 3.0);
        assert_eq!(uniform_ensemble_predict(&[C(0.0), C(2.0)], &[0.0]).unwrap(), 1.0);
        assert!(uniform_ensemble_predict::<C>(&[], &[0.0]).is_err());
    }

    #[test]
    fn random_vectors_match_naive_loop() {
        let mut s = rng::stream(9);
        let pred: Vec<f64> = (0..257).map(|_| s.gen_range(-3.0..3.0)).collect();
        let truth: Vec<f64> = (0..257).map(|_| s.gen_range(-3.0..3.0)).collect();
        let mut acc = 0.0;
        for i in 0..257 {
            acc += (pred[i] - truth[i]) * (pred[i] - truth[i]);
        }
        assert!((overall_mse(&pred, &truth).unwrap() - acc / 257.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn fold_metrics_are_permutation_invariant(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..120),
            folds_frac in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let n_folds = ((folds_frac * pairs.len() as f64) as usize).clamp(1, pairs.len());
            let (pred, truth): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let mut shuffled = pairs.clone();
            rng::shuffle(&mut rng::stream(seed), &mut shuffled);
            let (sp, st): (Vec<f64>, Vec<f64>) = shuffled.into_iter().unzip();
            let a = max_fold_loss(&pred, &truth, n_folds).unwrap().0;
            let b = max_fold_loss(&sp, &st, n_folds).unwrap().0;
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!((overall_mse(&pred, &truth).unwrap() - overall_mse(&sp, &st).unwrap()).abs() < 1e-9);
        }
    }
}
