//! Built-in public regression datasets.

use std::path::{Path, PathBuf};

use super::dataset::{load_csv_with, Dataset, LoadOptions, LoadReport};
use super::fetch::{extract_zip_member, fetch_dataset};
use crate::error::{DtbError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub url: &'static str,
    /// CSV inside a zip archive, when the download is an archive.
    pub member: Option<&'static str>,
    pub target_column: &'static str,
    pub target_scale: f64,
    pub ignore_columns: &'static [&'static str],
}

impl RegistryEntry {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            target_column: self.target_column.to_owned(),
            target_scale: self.target_scale,
            ignore_columns: self.ignore_columns.iter().map(|c| c.to_string()).collect(),
        }
    }
}

pub const REGISTRY: &[RegistryEntry] = &[
    // California housing (StatLib) as CSV; target in units of 100k.
    RegistryEntry {
        name: "housing",
        url: "https://raw.githubusercontent.com/ageron/handson-ml2/master/datasets/housing/housing.csv",
        member: None,
        target_column: "median_house_value",
        target_scale: 1e-5,
        ignore_columns: &["ocean_proximity"],
    },
    RegistryEntry {
        name: "grid",
        url: "https://archive.ics.uci.edu/ml/machine-learning-databases/00471/Data_for_UCI_named.csv",
        member: None,
        target_column: "stab",
        target_scale: 100.0,
        ignore_columns: &["stabf"],
    },
    RegistryEntry {
        name: "sc",
        url: "https://archive.ics.uci.edu/ml/machine-learning-databases/00464/superconduct.zip",
        member: Some("train.csv"),
        target_column: "critical_temp",
        target_scale: 0.1,
        ignore_columns: &[],
    },
    RegistryEntry {
        name: "bike",
        url: "https://archive.ics.uci.edu/ml/machine-learning-databases/00275/Bike-Sharing-Dataset.zip",
        member: Some("hour.csv"),
        target_column: "cnt",
        target_scale: 0.01,
        ignore_columns: &["instant", "dteday", "casual", "registered"],
    },
];

pub fn known_names() -> String {
    REGISTRY.iter().map(|e| e.name).collect::<Vec<_>>().join(", ")
}

pub fn lookup(name: &str) -> Result<&'static RegistryEntry> {
    REGISTRY
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| DtbError::UnknownDataset {
            name: name.to_owned(),
            known: known_names(),
        })
}

/// Fetches (or reuses) a registry dataset and returns the CSV path.
pub fn fetch_registered(name: &str, cache_dir: &Path) -> Result<PathBuf> {
    let entry = lookup(name)?;
    let path = fetch_dataset(entry.name, entry.url, cache_dir)?;
    match entry.member {
        Some(member) => extract_zip_member(&path, member),
        None => Ok(path),
    }
}

/// Loads a registry dataset with its target scale applied.
pub fn load_registered(name: &str, cache_dir: &Path) -> Result<(Dataset, LoadReport)> {
    let entry = lookup(name)?;
    let path = fetch_registered(name, cache_dir)?;
    load_csv_with(&path, &entry.load_options())
}
