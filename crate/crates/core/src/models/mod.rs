//! Regressors behind one prediction contract.

mod polynomial;
mod tree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use polynomial::PolynomialModel;
pub use tree::{Node, RegressionTree};

use crate::data::{Dataset, FeatureMatrix, IndexSet};
use crate::error::{DtbError, Result};

/// A trained regressor. Implementations must be deterministic and return a
/// finite value for finite input.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &[f64]) -> f64;

    /// Expected length of `x`.
    fn n_features(&self) -> usize;

    /// Model family, hyperparameters and training-subset id.
    fn descriptor(&self) -> String;
}

/// Serializable tagged union of the supported model families.
///
/// JSON form: `{"family": "tree"|"polynomial", "hyperparameters": {..},
/// "nodes"|"coefficients": .., "descriptor": ".."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    Tree {
        hyperparameters: TreeParams,
        #[serde(flatten)]
        tree: RegressionTree,
        subset_id: Option<usize>,
        descriptor: String,
    },
    Polynomial {
        hyperparameters: PolynomialParams,
        #[serde(flatten)]
        polynomial: PolynomialModel,
        subset_id: Option<usize>,
        descriptor: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialParams {
    pub degree: usize,
}

/// Which family to train for every ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Tree { max_depth: usize, min_leaf: usize },
    Polynomial { degree: usize },
}

impl ModelSpec {
    pub fn train(&self, data: &Dataset, subset: &IndexSet) -> Result<Model> {
        match *self {
            ModelSpec::Tree { max_depth, min_leaf } => train_tree(data, subset, max_depth, min_leaf),
            ModelSpec::Polynomial { degree } => train_polynomial(data, subset, degree),
        }
    }
}

fn tree_descriptor(p: TreeParams, subset_id: Option<usize>) -> String {
    let base = format!("tree(max_depth={},min_leaf={})", p.max_depth, p.min_leaf);
    with_subset(base, subset_id)
}

fn polynomial_descriptor(p: PolynomialParams, subset_id: Option<usize>) -> String {
    with_subset(format!("polynomial(degree={})", p.degree), subset_id)
}

fn with_subset(base: String, subset_id: Option<usize>) -> String {
    match subset_id {
        Some(i) => format!("{base}@subset{i}"),
        None => base,
    }
}

pub fn train_tree(data: &Dataset, subset: &IndexSet, max_depth: usize, min_leaf: usize) -> Result<Model> {
    let hyperparameters = TreeParams { max_depth, min_leaf };
    Ok(Model::Tree {
        tree: RegressionTree::fit(data, subset, max_depth, min_leaf)?,
        descriptor: tree_descriptor(hyperparameters, None),
        hyperparameters,
        subset_id: None,
    })
}

pub fn train_polynomial(data: &Dataset, subset: &IndexSet, degree: usize) -> Result<Model> {
    let hyperparameters = PolynomialParams { degree };
    Ok(Model::Polynomial {
        polynomial: PolynomialModel::fit(data, subset, degree)?,
        descriptor: polynomial_descriptor(hyperparameters, None),
        hyperparameters,
        subset_id: None,
    })
}

impl Model {
    /// Tags the model with the index of the training subset it was fit on.
    pub fn with_subset_id(mut self, id: usize) -> Self {
        match &mut self {
            Model::Tree {
                hyperparameters,
                subset_id,
                descriptor,
                ..
            } => {
                *subset_id = Some(id);
                *descriptor = tree_descriptor(*hyperparameters, *subset_id);
            }
            Model::Polynomial {
                hyperparameters,
                subset_id,
                descriptor,
                ..
            } => {
                *subset_id = Some(id);
                *descriptor = polynomial_descriptor(*hyperparameters, *subset_id);
            }
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl Predictor for Model {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Model::Tree { tree, .. } => tree.predict(x),
            Model::Polynomial { polynomial, .. } => polynomial.predict(x),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            Model::Tree { tree, .. } => tree.n_features(),
            Model::Polynomial { .. } => 1,
        }
    }

    fn descriptor(&self) -> String {
        match self {
            Model::Tree { descriptor, .. } | Model::Polynomial { descriptor, .. } => descriptor.clone(),
        }
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn predict(&self, x: &[f64]) -> f64 {
        (**self).predict(x)
    }

    fn n_features(&self) -> usize {
        (**self).n_features()
    }

    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
}

/// Row-wise prediction; output order follows the rows of `xs`.
pub fn predict_batch<P: Predictor + ?Sized>(model: &P, xs: &FeatureMatrix) -> Result<Vec<f64>> {
    if xs.n_cols() != model.n_features() {
        return Err(DtbError::DimensionMismatch {
            expected: model.n_features(),
            actual: xs.n_cols(),
        });
    }
    Ok(xs.rows().map(|row| model.predict(row)).collect())
}

/// Trains one model per subset, in parallel; output order follows `subsets`.
pub fn train_ensemble(data: &Dataset, subsets: &[IndexSet], spec: &ModelSpec) -> Result<Vec<Model>> {
    subsets
        .par_iter()
        .enumerate()
        .map(|(i, subset)| spec.train(data, subset).map(|m| m.with_subset_id(i)))
        .collect()
}
