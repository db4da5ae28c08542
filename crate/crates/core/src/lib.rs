//! Decision-theoretic bootstrapping.
//!
//! An ensemble of regressors is trained on random subsets of a training
//! set. A held-out UQ set is sorted by target, cut into blocks, and
//! resampled into empirical distributions. A zero-sum game between models
//! (minimizing empirical risk) and distributions (maximizing it) is solved
//! exactly for many independent resamplings; the averaged model strategy
//! weights the ensemble, giving a robust mean prediction and a pointwise
//! spread, while the game values summarize generalization error.

pub mod data;
pub mod error;
pub mod experiment;
pub mod game;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod uq;

pub use error::{DtbError, Result};
