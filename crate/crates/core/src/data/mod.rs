//! Dataset ingestion and the index views used by the game: train/UQ split,
//! bootstrap training subsets, sorted UQ blocks and empirical distributions.

mod dataset;
pub mod fetch;
pub mod registry;
mod split;
pub mod synthetic;

pub use dataset::{load_csv, load_csv_with, Dataset, FeatureMatrix, LoadOptions, LoadReport};
pub use fetch::{fetch_dataset, fetch_dataset_verified, FetchMetadata};
pub use split::{
    draw_empirical_distributions, fraction_count, sort_and_partition_uq, split_rows,
    split_train_uq, subsample_train_subsets, EmpiricalDistribution, IndexSet, UqPartition,
};
