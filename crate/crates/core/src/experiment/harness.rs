//! End-to-end runs, DT-versus-uniform comparisons and parameter sweeps.
//!
//! Seeds: repeat `r` uses `derive_seed(seed, [REPEAT, r])`; its test split
//! and training draw come from that repeat seed, and sweep point `i` plays
//! its games from `derive_seed(repeat_seed, [POINT, i])`. Repeats and sweep
//! points run in parallel; results are always assembled in index order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RoundsRule, RunConfig};
use super::smoothing::local_linear;
use crate::data::{split_rows, subsample_train_subsets, synthetic, Dataset, IndexSet, LoadReport};
use crate::error::{DtbError, Result};
use crate::game::{fit_dtb, play_game, split_for, DtbConfig, DtbResult, SupportSpec};
use crate::metrics::{uniform_ensemble_predict, EnsembleKind, EvalReport};
use crate::models::{train_ensemble, Model, Predictor};
use crate::rng::{self, tag};
use crate::uq::{coverage, predict_with_interval, value_histogram, PointPrediction, ValueHistogram, ValueSummary};

/// The data a repeat works on: the train-UQ pool and the held-out test rows.
struct Holdout {
    pool: Dataset,
    test: Option<Dataset>,
}

fn hold_out(data: &Dataset, test_fraction: f64, seed: u64) -> Result<Holdout> {
    if test_fraction == 0.0 {
        return Ok(Holdout {
            pool: data.clone(),
            test: None,
        });
    }
    let (pool, test) = split_rows(data.len(), test_fraction, rng::derive_seed(seed, &[tag::TEST_SPLIT]))?;
    if test.is_empty() {
        return Err(DtbError::config(format!(
            "test_fraction {test_fraction} leaves no test rows out of {}",
            data.len()
        )));
    }
    Ok(Holdout {
        pool: data.subset(pool.indices()),
        test: Some(data.subset(test.indices())),
    })
}

fn repeat_seed(seed: u64, r: usize) -> u64 {
    rng::derive_seed(seed, &[tag::REPEAT, r as u64])
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub result: DtbResult,
    pub value_histogram: ValueHistogram,
    #[serde(skip)]
    pub models: Vec<Model>,
    /// Predictions on the test rows, or on the pool when there is no test
    /// split.
    #[serde(skip)]
    pub predictions: Vec<PointPrediction>,
    #[serde(skip)]
    pub truth: Vec<f64>,
    pub coverage: f64,
    pub load_report: Option<LoadReport>,
}

/// Predicts every row of `data` with intervals.
pub fn predict_rows<P: Predictor>(models: &[P], p_bar: &[f64], data: &Dataset, z: f64) -> Result<Vec<PointPrediction>> {
    (0..data.len())
        .map(|i| predict_with_interval(models, p_bar, data.x(i), z))
        .collect()
}

/// One pipeline execution with prediction intervals on the evaluation rows.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let (data, load_report) = config.dataset.load()?;
    let holdout = hold_out(&data, config.split.test_fraction, config.seed)?;
    let fit = fit_dtb(&holdout.pool, &config.dtb_config(config.seed)?)?;
    let eval = holdout.test.as_ref().unwrap_or(&holdout.pool);
    let predictions = predict_rows(&fit.models, &fit.result.p_bar, eval, config.uq.z)?;
    let value_histogram = value_histogram(&fit.result.values(), config.uq.hist_bins)?;
    Ok(RunOutcome {
        coverage: coverage(&predictions, &eval.targets),
        truth: eval.targets.clone(),
        value_histogram,
        result: fit.result,
        models: fit.models,
        predictions,
        load_report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoOutcome {
    pub run: RunOutcome,
    pub grid_x: Vec<f64>,
    pub grid_truth: Vec<f64>,
    pub grid: Vec<PointPrediction>,
    pub grid_coverage: f64,
}

/// The x sin x demonstration plus predictions on an even grid of
/// `grid_points` over `[0, 10]` against the noiseless truth.
pub fn demo_x_sin_x(config: &RunConfig, grid_points: usize) -> Result<DemoOutcome> {
    let run = run(config)?;
    let grid_x = synthetic::linspace(0.0, 10.0, grid_points);
    let grid_truth: Vec<f64> = grid_x.iter().map(|&x| synthetic::x_sin_x(x)).collect();
    let grid = grid_x
        .iter()
        .map(|&x| predict_with_interval(&run.models, &run.result.p_bar, &[x], config.uq.z))
        .collect::<Result<Vec<_>>>()?;
    Ok(DemoOutcome {
        grid_coverage: coverage(&grid, &grid_truth),
        run,
        grid_x,
        grid_truth,
        grid,
    })
}

/// DT and uniform evaluation of one trained ensemble on the test rows.
fn evaluate_arms(models: &[Model], p_bar: &[f64], test: &Dataset, n_folds: usize) -> Result<(EvalReport, EvalReport)> {
    let dt: Vec<f64> = predict_rows(models, p_bar, test, 0.0)?.iter().map(|p| p.mean).collect();
    let uniform: Vec<f64> = (0..test.len())
        .map(|i| uniform_ensemble_predict(models, test.x(i)))
        .collect::<Result<_>>()?;
    Ok((
        EvalReport::evaluate(&dt, &test.targets, n_folds, EnsembleKind::Dt)?,
        EvalReport::evaluate(&uniform, &test.targets, n_folds, EnsembleKind::Uniform)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub seed: u64,
    pub dt: EvalReport,
    pub uniform: EvalReport,
    pub value_summary: ValueSummary,
    pub p_bar: Vec<f64>,
    pub dt_model_descriptors: Vec<String>,
    pub uniform_model_descriptors: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dt_overall: f64,
    pub dt_max_fold: f64,
    pub uniform_overall: f64,
    pub uniform_max_fold: f64,
    pub value_mean: f64,
}

impl Aggregate {
    pub fn of(records: &[RepeatRecord]) -> Self {
        let mean = |f: &dyn Fn(&RepeatRecord) -> f64| records.iter().map(f).sum::<f64>() / records.len() as f64;
        Self {
            dt_overall: mean(&|r| r.dt.overall_loss),
            dt_max_fold: mean(&|r| r.dt.max_fold_loss),
            uniform_overall: mean(&|r| r.uniform.overall_loss),
            uniform_max_fold: mean(&|r| r.uniform.max_fold_loss),
            value_mean: mean(&|r| r.value_summary.mean),
        }
    }

    /// `(uniform - dt) / uniform` on the max-fold loss.
    pub fn max_fold_improvement(&self) -> f64 {
        (self.uniform_max_fold - self.dt_max_fold) / self.uniform_max_fold
    }

    /// `(dt - uniform) / uniform` on the overall loss.
    pub fn overall_degradation(&self) -> f64 {
        (self.dt_overall - self.uniform_overall) / self.uniform_overall
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: RunConfig,
    pub per_repeat: Vec<RepeatRecord>,
    pub aggregate: Aggregate,
    /// Kept out of the serialized report so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Repeated DT-versus-uniform comparison on fresh test splits.
pub fn compare(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let started = std::time::Instant::now();
    let (data, _) = config.dataset.load()?;
    if config.split.test_fraction == 0.0 {
        return Err(DtbError::config("compare needs split.test_fraction > 0"));
    }
    let per_repeat: Vec<RepeatRecord> = (0..config.repeats)
        .into_par_iter()
        .map(|r| {
            let seed = repeat_seed(config.seed, r);
            let holdout = hold_out(&data, config.split.test_fraction, seed)?;
            let test = holdout.test.as_ref().expect("test split present");
            let fit = fit_dtb(&holdout.pool, &config.dtb_config(seed)?)?;
            let (dt, uniform) = evaluate_arms(&fit.models, &fit.result.p_bar, test, config.n_folds)?;
            let descriptors: Vec<String> = fit.models.iter().map(Predictor::descriptor).collect();
            Ok(RepeatRecord {
                repeat: r,
                seed,
                dt,
                uniform,
                value_summary: ValueSummary::of(&fit.result.values())?,
                p_bar: fit.result.p_bar.clone(),
                dt_model_descriptors: descriptors.clone(),
                uniform_model_descriptors: descriptors,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        aggregate: Aggregate::of(&per_repeat),
        per_repeat,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Mean metrics at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub rounds: usize,
    pub dt_max_fold: f64,
    pub dt_overall: f64,
    pub uniform_max_fold: f64,
    pub uniform_overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// `purification_ratio` or `data_fraction`.
    pub variable: String,
    pub points: Vec<SweepPoint>,
    pub smoothed_dt_max_fold: Vec<f64>,
    pub smoothed_dt_overall: Vec<f64>,
    pub bandwidth: f64,
    /// Sweep value minimizing the smoothed DT max-fold loss.
    pub min_max_fold_at: f64,
    pub config: RunConfig,
}

impl SweepReport {
    fn assemble(variable: &str, points: Vec<SweepPoint>, config: &RunConfig) -> Self {
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let bw = config.sweep.bandwidth;
        let smoothed_dt_max_fold = local_linear(&xs, &points.iter().map(|p| p.dt_max_fold).collect::<Vec<_>>(), bw);
        let smoothed_dt_overall = local_linear(&xs, &points.iter().map(|p| p.dt_overall).collect::<Vec<_>>(), bw);
        let min_max_fold_at = smoothed_dt_max_fold
            .iter()
            .zip(&xs)
            .min_by(|a, b| a.0.total_cmp(b.0))
            .map_or(f64::NAN, |(_, &x)| x);
        Self {
            variable: variable.to_owned(),
            points,
            smoothed_dt_max_fold,
            smoothed_dt_overall,
            bandwidth: bw,
            min_max_fold_at,
            config: config.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{},rounds,dt_max_fold,dt_overall,uniform_max_fold,uniform_overall,smoothed_dt_max_fold,smoothed_dt_overall\n",
            self.variable
        );
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.x,
                p.rounds,
                p.dt_max_fold,
                p.dt_overall,
                p.uniform_max_fold,
                p.uniform_overall,
                self.smoothed_dt_max_fold[i],
                self.smoothed_dt_overall[i]
            );
        }
        out
    }
}

struct PointMetrics {
    dt: EvalReport,
    uniform: EvalReport,
}

fn mean_point(x: f64, rounds: usize, metrics: &[PointMetrics]) -> SweepPoint {
    let k = metrics.len() as f64;
    let mean = |f: &dyn Fn(&PointMetrics) -> f64| metrics.iter().map(f).sum::<f64>() / k;
    SweepPoint {
        x,
        rounds,
        dt_max_fold: mean(&|m| m.dt.max_fold_loss),
        dt_overall: mean(&|m| m.dt.overall_loss),
        uniform_max_fold: mean(&|m| m.uniform.max_fold_loss),
        uniform_overall: mean(&|m| m.uniform.overall_loss),
    }
}

/// `K` for a purification ratio under the configured rule.
pub fn rounds_for_ratio(rule: RoundsRule, ratio: f64, fixed: usize) -> usize {
    match rule {
        RoundsRule::FiveOverRatio => ((5.0 / ratio).round() as usize).max(1),
        RoundsRule::Fixed => fixed,
    }
}

/// Mean test metrics as a function of the purification ratio `n s / |U|`.
///
/// Each repeat trains one ensemble and replays the game at every ratio.
pub fn sweep_purification(config: &RunConfig) -> Result<SweepReport> {
    config.validate()?;
    let ratios = &config.sweep.ratios;
    if ratios.is_empty() {
        return Err(DtbError::config("sweep.ratios is empty"));
    }
    if let Some(r) = ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(DtbError::config(format!("purification ratios must lie in (0, 1], got {r}")));
    }
    if config.split.test_fraction == 0.0 {
        return Err(DtbError::config("sweeps need split.test_fraction > 0"));
    }
    let (data, _) = config.dataset.load()?;

    let per_repeat: Vec<Vec<PointMetrics>> = (0..config.repeats)
        .into_par_iter()
        .map(|r| {
            let seed = repeat_seed(config.seed, r);
            let holdout = hold_out(&data, config.split.test_fraction, seed)?;
            let test = holdout.test.as_ref().expect("test split present");
            let base = config.dtb_config(seed)?;
            let (train, uq) = split_for(&holdout.pool, &base)?;
            for &ratio in ratios {
                SupportSpec::Ratio(ratio).resolve(uq.len(), base.game.n)?;
            }
            let models = train_models(&holdout.pool, &train, &base)?;
            ratios
                .par_iter()
                .enumerate()
                .map(|(i, &ratio)| {
                    let mut point = base;
                    point.game.support = SupportSpec::Ratio(ratio);
                    point.game.rounds = rounds_for_ratio(config.sweep.rounds_rule, ratio, config.game.rounds);
                    point.master_seed = rng::derive_seed(seed, &[tag::POINT, i as u64]);
                    let result = play_game(&holdout.pool, &uq, &models, &point)?;
                    let (dt, uniform) = evaluate_arms(&models, &result.p_bar, test, config.sweep.n_folds)?;
                    Ok(PointMetrics { dt, uniform })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let points = ratios
        .iter()
        .enumerate()
        .map(|(i, &ratio)| {
            let metrics: Vec<PointMetrics> = per_repeat
                .iter()
                .map(|rep| PointMetrics {
                    dt: rep[i].dt.clone(),
                    uniform: rep[i].uniform.clone(),
                })
                .collect();
            mean_point(ratio, rounds_for_ratio(config.sweep.rounds_rule, ratio, config.game.rounds), &metrics)
        })
        .collect();
    Ok(SweepReport::assemble("purification_ratio", points, config))
}

fn train_models(pool: &Dataset, train: &IndexSet, config: &DtbConfig) -> Result<Vec<Model>> {
    let subsets = subsample_train_subsets(
        train,
        config.m,
        config.data_fraction,
        rng::derive_seed(config.master_seed, &[tag::TRAIN_SUBSETS]),
    )?;
    train_ensemble(pool, &subsets, &config.model)
}

/// Mean test metrics as a function of the per-model data fraction, with the
/// whole train-UQ pool serving as both training and UQ set.
pub fn sweep_fraction(config: &RunConfig) -> Result<SweepReport> {
    config.validate()?;
    let fractions = &config.sweep.fractions;
    if fractions.is_empty() {
        return Err(DtbError::config("sweep.fractions is empty"));
    }
    if let Some(f) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(DtbError::config(format!("data fractions must lie in (0, 1], got {f}")));
    }
    if config.split.test_fraction == 0.0 {
        return Err(DtbError::config("sweeps need split.test_fraction > 0"));
    }
    let (data, _) = config.dataset.load()?;

    let per_repeat: Vec<Vec<PointMetrics>> = (0..config.repeats)
        .into_par_iter()
        .map(|r| {
            let seed = repeat_seed(config.seed, r);
            let holdout = hold_out(&data, config.split.test_fraction, seed)?;
            let test = holdout.test.as_ref().expect("test split present");
            fractions
                .par_iter()
                .enumerate()
                .map(|(i, &fraction)| {
                    let mut point = config.dtb_config(rng::derive_seed(seed, &[tag::POINT, i as u64]))?;
                    point.t_equals_u = true;
                    point.data_fraction = fraction;
                    let fit = fit_dtb(&holdout.pool, &point)?;
                    let (dt, uniform) = evaluate_arms(&fit.models, &fit.result.p_bar, test, config.sweep.n_folds)?;
                    Ok(PointMetrics { dt, uniform })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let points = fractions
        .iter()
        .enumerate()
        .map(|(i, &fraction)| {
            let metrics: Vec<PointMetrics> = per_repeat
                .iter()
                .map(|rep| PointMetrics {
                    dt: rep[i].dt.clone(),
                    uniform: rep[i].uniform.clone(),
                })
                .collect();
            mean_point(fraction, config.game.rounds, &metrics)
        })
        .collect();
    Ok(SweepReport::assemble("data_fraction", points, config))
}

