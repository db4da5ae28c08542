use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DtbError, Result};

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(DtbError::data(format!(
                "matrix buffer has {} values, expected {n_rows}x{n_cols}",
                values.len()
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(DtbError::DimensionMismatch {
                    expected: n_cols,
                    actual: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, values)
    }

    /// A matrix with no rows but a fixed column count.
    pub fn empty(n_cols: usize) -> Self {
        Self {
            n_rows: 0,
            n_cols,
            values: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    /// Copies the given rows into a new matrix.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            values,
        }
    }
}

/// Features, targets and column labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
    pub target_name: String,
}

impl Dataset {
    pub fn new(
        features: FeatureMatrix,
        targets: Vec<f64>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        if features.n_rows() != targets.len() {
            return Err(DtbError::data(format!(
                "{} feature rows but {} targets",
                features.n_rows(),
                targets.len()
            )));
        }
        if feature_names.len() != features.n_cols() {
            return Err(DtbError::data(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.n_cols()
            )));
        }
        if features.values.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(DtbError::data("dataset contains non-finite values"));
        }
        Ok(Self {
            features,
            targets,
            feature_names,
            target_name: target_name.into(),
        })
    }

    /// Builds a dataset from rows, naming features `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let features = FeatureMatrix::from_rows(rows)?;
        let names = (0..features.n_cols()).map(|j| format!("x{j}")).collect();
        Self::new(features, targets, names, "y")
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn y(&self, i: usize) -> f64 {
        self.targets[i]
    }

    /// Copies the given rows into a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select(rows),
            targets: rows.iter().map(|&r| self.targets[r]).collect(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        }
    }
}

/// Summary of a CSV load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub target_scale: f64,
}

/// Column handling for [`load_csv_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    pub target_column: String,
    pub target_scale: f64,
    /// Columns skipped entirely (identifiers, categorical or leaking columns).
    pub ignore_columns: Vec<String>,
}

impl LoadOptions {
    pub fn new(target_column: impl Into<String>, target_scale: f64) -> Self {
        Self {
            target_column: target_column.into(),
            target_scale,
            ignore_columns: Vec::new(),
        }
    }
}

/// Loads a headed CSV file, multiplying the target column by `scale`.
///
/// Rows with an unparseable or non-finite cell are dropped and counted.
pub fn load_csv(path: &Path, target_column: &str, scale: f64) -> Result<(Dataset, LoadReport)> {
    load_csv_with(path, &LoadOptions::new(target_column, scale))
}

pub fn load_csv_with(path: &Path, options: &LoadOptions) -> Result<(Dataset, LoadReport)> {
    if !path.is_file() {
        return Err(DtbError::MissingFile(path.to_path_buf()));
    }
    if !options.target_scale.is_finite() {
        return Err(DtbError::config("target scale must be finite"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();

    let target_idx = header
        .iter()
        .position(|h| h == &options.target_column)
        .ok_or_else(|| DtbError::MissingColumn {
            column: options.target_column.clone(),
            header: header.clone(),
        })?;
    let feature_idx: Vec<usize> = (0..header.len())
        .filter(|&j| j != target_idx && !options.ignore_columns.contains(&header[j]))
        .collect();

    let mut values = Vec::new();
    let mut targets = Vec::new();
    let mut rows_read = 0;
    let mut rows_dropped = 0;
    let mut row_buf = Vec::with_capacity(feature_idx.len());
    for record in reader.records() {
        let record = record?;
        rows_read += 1;
        if record.len() != header.len() {
            rows_dropped += 1;
            continue;
        }
        let parse = |j: usize| record[j].parse::<f64>().ok().filter(|v| v.is_finite());
        row_buf.clear();
        let mut ok = true;
        for &j in &feature_idx {
            match parse(j) {
                Some(v) => row_buf.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let target = parse(target_idx).map(|t| t * options.target_scale);
        match target {
            Some(t) if ok && t.is_finite() => {
                values.extend_from_slice(&row_buf);
                targets.push(t);
            }
            _ => rows_dropped += 1,
        }
    }
    if targets.is_empty() {
        return Err(DtbError::NoUsableRows(path.to_path_buf()));
    }

    let features = FeatureMatrix::new(targets.len(), feature_idx.len(), values)?;
    let names = feature_idx.iter().map(|&j| header[j].clone()).collect();
    let dataset = Dataset::new(features, targets, names, options.target_column.clone())?;
    let report = LoadReport {
        rows_read,
        rows_dropped,
        target_scale: options.target_scale,
    };
    Ok((dataset, report))
}
