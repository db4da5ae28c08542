//! The purification loop: split once, train the ensemble once, then play
//! `K` independently randomized games and average the model strategies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{compute_loss_matrix, ErrorFn};
use super::simplex::solve_zero_sum;
use crate::data::{
    draw_empirical_distributions, sort_and_partition_uq, split_train_uq, subsample_train_subsets,
    Dataset, IndexSet, UqPartition,
};
use crate::error::{DtbError, Result};
use crate::models::{train_ensemble, Model, ModelSpec, Predictor};
use crate::rng::{self, tag};

/// Size of each empirical distribution's support: either `s` directly or
/// the purification ratio `n s / |U|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportSpec {
    Size(usize),
    Ratio(f64),
}

impl SupportSpec {
    /// Resolves to `s` for a UQ set of `uq_len` rows cut into `n` blocks.
    pub fn resolve(self, uq_len: usize, n: usize) -> Result<usize> {
        let block = uq_len / n.max(1);
        let s = match self {
            SupportSpec::Size(s) => s,
            SupportSpec::Ratio(r) => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(DtbError::config(format!(
                        "purification ratio must lie in (0, 1], got {r}"
                    )));
                }
                (r * uq_len as f64 / n as f64).round() as usize
            }
        };
        if s == 0 {
            return Err(DtbError::config(format!(
                "support size s resolves to 0 (|U| = {uq_len}, n = {n}); need s >= 1"
            )));
        }
        // A ratio of 1 rounds up past the block when n does not divide |U|.
        let s = match self {
            SupportSpec::Ratio(_) => s.min(block),
            SupportSpec::Size(_) => s,
        };
        if s > block {
            return Err(DtbError::config(format!(
                "support size s = {s} exceeds block size floor(|U|/n) = {block}"
            )));
        }
        Ok(s)
    }
}

/// The game half of a run: how the UQ set is blocked and sampled, how many
/// rounds are played, and the error function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: usize,
    pub support: SupportSpec,
    pub rounds: usize,
    #[serde(default)]
    pub error_fn: ErrorFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtbConfig {
    pub uq_fraction: f64,
    /// Use all rows for both training and UQ.
    #[serde(default)]
    pub t_equals_u: bool,
    pub m: usize,
    pub data_fraction: f64,
    pub model: ModelSpec,
    pub game: GameConfig,
    pub master_seed: u64,
}

impl DtbConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.t_equals_u && !(self.uq_fraction > 0.0 && self.uq_fraction < 1.0) {
            return Err(DtbError::config(format!(
                "uq_fraction must lie in (0, 1), got {}",
                self.uq_fraction
            )));
        }
        if self.m == 0 {
            return Err(DtbError::config("m must be at least 1"));
        }
        if !(self.data_fraction > 0.0 && self.data_fraction <= 1.0) {
            return Err(DtbError::config(format!(
                "data_fraction must lie in (0, 1], got {}",
                self.data_fraction
            )));
        }
        if self.game.n == 0 {
            return Err(DtbError::config("n must be at least 1"));
        }
        if self.game.rounds == 0 {
            return Err(DtbError::config("K (rounds) must be at least 1"));
        }
        if let ModelSpec::Tree { min_leaf: 0, .. } = self.model {
            return Err(DtbError::config("min_leaf must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub k: usize,
    pub seed: u64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub value: f64,
    pub loss_min: f64,
    pub loss_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtbResult {
    pub config: DtbConfig,
    pub p_bar: Vec<f64>,
    pub rounds: Vec<RoundRecord>,
    pub model_descriptors: Vec<String>,
    pub uq_size: usize,
    pub block_size: usize,
    pub s: usize,
    pub generator: String,
}

impl DtbResult {
    pub fn values(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.value).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A completed run together with the trained ensemble and the split.
#[derive(Debug, Clone)]
pub struct DtbFit {
    pub result: DtbResult,
    pub models: Vec<Model>,
    pub train: IndexSet,
    pub uq: IndexSet,
}

/// Entrywise mean of the per-round model strategies.
pub fn aggregate_strategies(rounds: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = rounds
        .first()
        .ok_or_else(|| DtbError::config("cannot aggregate zero rounds"))?;
    let m = first.len();
    let mut total = vec![0.0; m];
    for p in rounds {
        if p.len() != m {
            return Err(DtbError::DimensionMismatch {
                expected: m,
                actual: p.len(),
            });
        }
        for (acc, v) in total.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let k = rounds.len() as f64;
    Ok(total.into_iter().map(|t| t / k).collect())
}

/// Splits the rows into train and UQ sets as configured.
pub fn split_for(data: &Dataset, config: &DtbConfig) -> Result<(IndexSet, IndexSet)> {
    if config.t_equals_u {
        Ok((IndexSet::full(data.len()), IndexSet::full(data.len())))
    } else {
        split_train_uq(data, config.uq_fraction, rng::derive_seed(config.master_seed, &[tag::SPLIT]))
    }
}

/// Runs the full pipeline and keeps the trained models.
pub fn fit_dtb(data: &Dataset, config: &DtbConfig) -> Result<DtbFit> {
    config.validate()?;
    let (train, uq) = split_for(data, config)?;
    // Check the game geometry before spending time on training.
    if config.game.n > uq.len() {
        return Err(DtbError::config(format!(
            "n = {} exceeds the {} UQ rows",
            config.game.n,
            uq.len()
        )));
    }
    config.game.support.resolve(uq.len(), config.game.n)?;

    let subsets = subsample_train_subsets(
        &train,
        config.m,
        config.data_fraction,
        rng::derive_seed(config.master_seed, &[tag::TRAIN_SUBSETS]),
    )?;
    let models = train_ensemble(data, &subsets, &config.model)?;
    let result = play_game(data, &uq, &models, config)?;
    Ok(DtbFit {
        result,
        models,
        train,
        uq,
    })
}

/// Runs the full pipeline on `data`.
pub fn run_dtb(data: &Dataset, config: &DtbConfig) -> Result<DtbResult> {
    fit_dtb(data, config).map(|fit| fit.result)
}

/// Plays the `K` purification rounds for an already trained ensemble.
///
/// Round `k` draws its distributions from the sub-seed
/// `derive_seed(master_seed, [ROUND, k])`, so rounds are independent of
/// execution order and run in parallel.
pub fn play_game<P: Predictor>(
    data: &Dataset,
    uq: &IndexSet,
    models: &[P],
    config: &DtbConfig,
) -> Result<DtbResult> {
    if models.is_empty() {
        return Err(DtbError::config("need at least one model"));
    }
    let game = config.game;
    let partition = sort_and_partition_uq(data, uq, game.n)?;
    let s = game.support.resolve(uq.len(), game.n)?;

    let rounds: Vec<RoundRecord> = (0..game.rounds)
        .into_par_iter()
        .map(|k| play_round(data, &partition, models, s, game.error_fn, config.master_seed, k))
        .collect::<Result<_>>()?;

    let strategies: Vec<Vec<f64>> = rounds.iter().map(|r| r.p.clone()).collect();
    Ok(DtbResult {
        config: *config,
        p_bar: aggregate_strategies(&strategies)?,
        rounds,
        model_descriptors: models.iter().map(Predictor::descriptor).collect(),
        uq_size: uq.len(),
        block_size: partition.block_size(),
        s,
        generator: rng::GENERATOR.to_owned(),
    })
}

fn play_round<P: Predictor>(
    data: &Dataset,
    partition: &UqPartition,
    models: &[P],
    s: usize,
    error_fn: ErrorFn,
    master_seed: u64,
    k: usize,
) -> Result<RoundRecord> {
    let seed = rng::derive_seed(master_seed, &[tag::ROUND, k as u64]);
    let dists = draw_empirical_distributions(partition, s, seed)?;
    let loss = compute_loss_matrix(models, &dists, data, error_fn)?;
    let solution = solve_zero_sum(&loss)?;
    Ok(RoundRecord {
        k,
        seed,
        p: solution.p,
        q: solution.q,
        value: solution.value,
        loss_min: loss.min(),
        loss_max: loss.max(),
    })
}
