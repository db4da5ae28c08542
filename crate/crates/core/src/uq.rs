//! Pointwise uncertainty from a weighted ensemble, and the histogram of
//! game values.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{DtbError, Result};
use crate::models::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPrediction {
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
    pub z: f64,
}

impl PointPrediction {
    pub fn covers(&self, truth: f64) -> bool {
        self.lower <= truth && truth <= self.upper
    }
}

fn check_lengths<P: Predictor>(models: &[P], weights: &[f64]) -> Result<()> {
    if models.is_empty() || models.len() != weights.len() {
        return Err(DtbError::DimensionMismatch {
            expected: models.len(),
            actual: weights.len(),
        });
    }
    Ok(())
}

/// Weighted mean and spread of the predictions at one point.
///
/// Deviations are taken from the prediction of the heaviest model, so a
/// one-hot weight vector returns that model's output exactly and identical
/// models give zero spread exactly.
fn weighted_moments(predictions: &[f64], weights: &[f64]) -> (f64, f64) {
    let anchor = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map_or(0.0, |(i, _)| predictions[i]);
    let shift: f64 = predictions
        .iter()
        .zip(weights)
        .map(|(f, w)| w * (f - anchor))
        .sum();
    let mean = anchor + shift;
    let var: f64 = predictions
        .iter()
        .zip(weights)
        .map(|(f, w)| w * (f - mean).powi(2))
        .sum();
    (mean, var.max(0.0).sqrt())
}

/// `rho(x) = sum_i F_i(x) p_i`.
pub fn ensemble_mean<P: Predictor>(models: &[P], p_bar: &[f64], x: &[f64]) -> Result<f64> {
    check_lengths(models, p_bar)?;
    let preds: Vec<f64> = models.iter().map(|m| m.predict(x)).collect();
    Ok(weighted_moments(&preds, p_bar).0)
}

/// `sigma(x) = sqrt(sum_i (F_i(x) - rho(x))^2 p_i)`, the weighted
/// population standard deviation.
pub fn ensemble_std<P: Predictor>(models: &[P], p_bar: &[f64], x: &[f64]) -> Result<f64> {
    check_lengths(models, p_bar)?;
    let preds: Vec<f64> = models.iter().map(|m| m.predict(x)).collect();
    Ok(weighted_moments(&preds, p_bar).1)
}

/// Mean with the symmetric interval `mean -/+ z * std`.
pub fn predict_with_interval<P: Predictor>(
    models: &[P],
    p_bar: &[f64],
    x: &[f64],
    z: f64,
) -> Result<PointPrediction> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(DtbError::config(format!("interval multiplier z must be >= 0, got {z}")));
    }
    check_lengths(models, p_bar)?;
    let preds: Vec<f64> = models.iter().map(|m| m.predict(x)).collect();
    let (mean, std) = weighted_moments(&preds, p_bar);
    Ok(PointPrediction {
        mean,
        std,
        lower: mean - z * std,
        upper: mean + z * std,
        z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl ValueSummary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(DtbError::config("no values to summarize"));
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
        Ok(Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub summary: ValueSummary,
}

/// Equal-width histogram over `[min, max]`. Bins are right-open except the
/// last; a zero-width range collapses to one bin.
pub fn value_histogram(values: &[f64], bins: usize) -> Result<ValueHistogram> {
    if values.is_empty() {
        return Err(DtbError::config("cannot histogram an empty value list"));
    }
    if bins == 0 {
        return Err(DtbError::config("histogram needs at least one bin"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(DtbError::Numeric("non-finite game value".into()));
    }
    let summary = ValueSummary::of(values)?;
    let (lo, hi) = (summary.min, summary.max);
    if lo == hi {
        return Ok(ValueHistogram {
            bin_edges: vec![lo, hi],
            counts: vec![values.len()],
            summary,
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut bin_edges: Vec<f64> = (0..bins).map(|b| lo + width * b as f64).collect();
    bin_edges.push(hi);
    let mut counts = vec![0; bins];
    for &v in values {
        let mut b = (((v - lo) / width).floor() as usize).min(bins - 1);
        // Guard the floor against rounding at interior edges.
        while b > 0 && v < bin_edges[b] {
            b -= 1;
        }
        while b + 1 < bins && v >= bin_edges[b + 1] {
            b += 1;
        }
        counts[b] += 1;
    }
    Ok(ValueHistogram {
        bin_edges,
        counts,
        summary,
    })
}

/// Writes `point_id,mean,std,lower,upper[,truth,covered]` rows.
pub fn write_predictions_csv<W: Write>(
    writer: W,
    predictions: &[PointPrediction],
    truth: Option<&[f64]>,
) -> Result<()> {
    if let Some(t) = truth {
        if t.len() != predictions.len() {
            return Err(DtbError::DimensionMismatch {
                expected: predictions.len(),
                actual: t.len(),
            });
        }
    }
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["point_id", "mean", "std", "lower", "upper"];
    if truth.is_some() {
        header.extend(["truth", "covered"]);
    }
    out.write_record(&header)?;
    for (i, p) in predictions.iter().enumerate() {
        let mut record = vec![
            i.to_string(),
            p.mean.to_string(),
            p.std.to_string(),
            p.lower.to_string(),
            p.upper.to_string(),
        ];
        if let Some(t) = truth {
            record.push(t[i].to_string());
            record.push(u8::from(p.covers(t[i])).to_string());
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Fraction of `truth` values inside their intervals.
pub fn coverage(predictions: &[PointPrediction], truth: &[f64]) -> f64 {
    let hits = predictions
        .iter()
        .zip(truth)
        .filter(|(p, &t)| p.covers(t))
        .count();
    hits as f64 / predictions.len().max(1) as f64
}
