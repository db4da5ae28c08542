use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{load_csv_with, registry, synthetic, Dataset, LoadOptions, LoadReport};
use crate::error::{DtbError, Result};
use crate::game::{DtbConfig, ErrorFn, GameConfig, SupportSpec};
use crate::models::ModelSpec;

/// Names resolved to generated data instead of files.
pub const SYNTHETIC_NAMES: &[&str] = &["synthetic-housing", "xsinx", "heteroskedastic"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Registry or synthetic dataset name.
    pub name: Option<String>,
    /// CSV file; used when `name` is absent.
    pub path: Option<PathBuf>,
    pub target_column: Option<String>,
    /// Overrides the registry scale when set.
    pub target_scale: Option<f64>,
    pub ignore_columns: Vec<String>,
    /// Row count for synthetic datasets.
    pub rows: Option<usize>,
    /// Generator seed for synthetic datasets (fixed across repeats).
    pub synthetic_seed: u64,
    pub cache_dir: PathBuf,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            name: Some("synthetic-housing".into()),
            path: None,
            target_column: None,
            target_scale: None,
            ignore_columns: Vec::new(),
            rows: None,
            synthetic_seed: 0,
            cache_dir: PathBuf::from("data-cache"),
        }
    }
}

impl DatasetConfig {
    /// Interprets a `--dataset` argument as a known name or a file path.
    pub fn set_from_arg(&mut self, arg: &str) {
        let lower = arg.to_ascii_lowercase();
        if SYNTHETIC_NAMES.contains(&lower.as_str()) || registry::lookup(&lower).is_ok() {
            self.name = Some(lower);
            self.path = None;
        } else {
            self.name = None;
            self.path = Some(PathBuf::from(arg));
        }
    }

    pub fn load(&self) -> Result<(Dataset, Option<LoadReport>)> {
        let mut loaded = match (&self.name, &self.path) {
            (Some(name), _) => match name.as_str() {
                "synthetic-housing" => (
                    synthetic::housing_surrogate(self.rows.unwrap_or(20_000), self.synthetic_seed)?,
                    None,
                ),
                "xsinx" => (
                    synthetic::x_sin_x_samples(self.rows.unwrap_or(35), self.synthetic_seed)?,
                    None,
                ),
                "heteroskedastic" => (
                    synthetic::heteroskedastic_line(self.rows.unwrap_or(2_000), self.synthetic_seed)?,
                    None,
                ),
                other => {
                    let entry = registry::lookup(other)?;
                    let path = registry::fetch_registered(other, &self.cache_dir)?;
                    let mut options = entry.load_options();
                    if let Some(scale) = self.target_scale {
                        options.target_scale = scale;
                    }
                    options.ignore_columns.extend(self.ignore_columns.iter().cloned());
                    let (d, r) = load_csv_with(&path, &options)?;
                    (d, Some(r))
                }
            },
            (None, Some(path)) => {
                if !path.is_file() {
                    return Err(DtbError::MissingFile(path.clone()));
                }
                let target = self.target_column.clone().ok_or_else(|| {
                    DtbError::config("dataset.target_column is required for CSV input")
                })?;
                let mut options = LoadOptions::new(target, self.target_scale.unwrap_or(1.0));
                options.ignore_columns = self.ignore_columns.clone();
                let (d, r) = load_csv_with(path, &options)?;
                (d, Some(r))
            }
            (None, None) => return Err(DtbError::config("dataset needs a name or a path")),
        };
        if self.path.is_none() && self.name.as_deref().is_some_and(|n| SYNTHETIC_NAMES.contains(&n)) {
            if let Some(scale) = self.target_scale {
                for y in &mut loaded.0.targets {
                    *y *= scale;
                }
            }
        }
        Ok(loaded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Held-out test fraction (0 disables the test split).
    pub test_fraction: f64,
    pub uq_fraction: f64,
    pub t_equals_u: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            uq_fraction: 0.33,
            t_equals_u: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tree,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsConfig {
    pub family: Family,
    pub m: usize,
    pub data_fraction: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub degree: i64,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self {
            family: Family::Tree,
            m: 10,
            data_fraction: 0.5,
            max_depth: 10,
            min_leaf: 1,
            degree: 4,
        }
    }
}

impl ModelsConfig {
    pub fn spec(&self) -> Result<ModelSpec> {
        match self.family {
            Family::Tree => Ok(ModelSpec::Tree {
                max_depth: self.max_depth,
                min_leaf: self.min_leaf,
            }),
            Family::Polynomial => {
                if self.degree < 0 {
                    return Err(DtbError::config(format!(
                        "polynomial degree must be >= 0, got {}",
                        self.degree
                    )));
                }
                Ok(ModelSpec::Polynomial {
                    degree: self.degree as usize,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameSection {
    pub n: usize,
    pub s: Option<usize>,
    pub purification_ratio: Option<f64>,
    #[serde(alias = "k")]
    pub rounds: usize,
    pub error_fn: ErrorFn,
}

impl Default for GameSection {
    fn default() -> Self {
        Self {
            n: 100,
            s: None,
            purification_ratio: Some(0.2),
            rounds: 100,
            error_fn: ErrorFn::Squared,
        }
    }
}

impl GameSection {
    pub fn support(&self) -> Result<SupportSpec> {
        match (self.s, self.purification_ratio) {
            (Some(s), None) => Ok(SupportSpec::Size(s)),
            (None, Some(r)) => Ok(SupportSpec::Ratio(r)),
            _ => Err(DtbError::config(
                "exactly one of game.s and game.purification_ratio must be given",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UqConfig {
    pub z: f64,
    pub hist_bins: usize,
}

impl Default for UqConfig {
    fn default() -> Self {
        Self { z: 1.0, hist_bins: 20 }
    }
}

/// How `K` follows the purification ratio in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundsRule {
    /// `K = round(5 / ratio)`.
    #[default]
    FiveOverRatio,
    /// `K = game.rounds` at every ratio.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub ratios: Vec<f64>,
    pub fractions: Vec<f64>,
    pub rounds_rule: RoundsRule,
    /// Tricube local-linear smoothing bandwidth, in sweep-variable units.
    pub bandwidth: f64,
    /// Folds for the max-fold metric in sweeps.
    pub n_folds: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ratios: (1..=19).map(|i| i as f64 / 20.0).collect(),
            fractions: vec![0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
            rounds_rule: RoundsRule::FiveOverRatio,
            bandwidth: 0.3,
            n_folds: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Each model sees 0.5% of the train set.
    Weak,
    /// Each model sees 50% of the train set.
    Strong,
}

impl Mode {
    pub fn data_fraction(self) -> f64 {
        match self {
            Mode::Weak => 0.005,
            Mode::Strong => 0.5,
        }
    }
}

/// Full, echoable configuration of a run or experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub split: SplitConfig,
    pub models: ModelsConfig,
    pub game: GameSection,
    pub uq: UqConfig,
    pub sweep: SweepConfig,
    pub mode: Option<Mode>,
    /// Folds for the max-fold metric.
    pub n_folds: usize,
    pub seed: u64,
    pub repeats: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            split: SplitConfig::default(),
            models: ModelsConfig::default(),
            game: GameSection::default(),
            uq: UqConfig::default(),
            sweep: SweepConfig::default(),
            mode: None,
            n_folds: 100,
            seed: 0,
            repeats: 20,
        }
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DtbError::config(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(DtbError::MissingFile(path.to_path_buf()));
        }
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Effective per-model data fraction (the mode overrides the section).
    pub fn data_fraction(&self) -> f64 {
        self.mode.map_or(self.models.data_fraction, Mode::data_fraction)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.split.test_fraction;
        if !(0.0..1.0).contains(&t) {
            return Err(DtbError::config(format!("split.test_fraction must lie in [0, 1), got {t}")));
        }
        if !(self.uq.z >= 0.0 && self.uq.z.is_finite()) {
            return Err(DtbError::config("uq.z must be a finite value >= 0"));
        }
        if self.uq.hist_bins == 0 {
            return Err(DtbError::config("uq.hist_bins must be at least 1"));
        }
        if self.repeats == 0 {
            return Err(DtbError::config("repeats must be at least 1"));
        }
        if self.n_folds == 0 {
            return Err(DtbError::config("n_folds must be at least 1"));
        }
        self.models.spec()?;
        self.game.support()?;
        self.dtb_config(self.seed)?.validate()
    }

    /// The pipeline configuration for one execution with `master_seed`.
    pub fn dtb_config(&self, master_seed: u64) -> Result<DtbConfig> {
        Ok(DtbConfig {
            uq_fraction: self.split.uq_fraction,
            t_equals_u: self.split.t_equals_u,
            m: self.models.m,
            data_fraction: self.data_fraction(),
            model: self.models.spec()?,
            game: GameConfig {
                n: self.game.n,
                support: self.game.support()?,
                rounds: self.game.rounds,
                error_fn: self.game.error_fn,
            },
            master_seed,
        })
    }

    /// The x sin x demonstration: 35 samples, 20 degree-4 polynomials, each
/// fitted to a fifth of the samples.
    pub fn x_sin_x_demo() -> Self {
        Self {
            dataset: DatasetConfig {
                name: Some("xsinx".into()),
                rows: Some(35),
                ..DatasetConfig::default()
            },
            split: SplitConfig {
                test_fraction: 0.0,
                uq_fraction: 0.33,
                t_equals_u: true,
            },
            models: ModelsConfig {
                family: Family::Polynomial,
                m: 20,
                // Seven points per quartic keeps the models weak enough for
                // their spread to cover the fitting bias.
                data_fraction: 0.2,
                degree: 4,
                ..ModelsConfig::default()
            },
            game: GameSection {
                n: 5,
                s: None,
                purification_ratio: Some(0.2),
                rounds: 100,
                error_fn: ErrorFn::Squared,
            },
            uq: UqConfig { z: 1.0, hist_bins: 20 },
            repeats: 1,
            ..Self::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_json_str(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = RunConfig::from_json_str(r#"{"game": {"n": 10, "k": 7}, "seed": 3}"#).unwrap();
        assert_eq!(cfg.game.n, 10);
        assert_eq!(cfg.game.rounds, 7);
        assert_eq!(cfg.game.purification_ratio, Some(0.2));
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json_str(r#"{"gmae": {}}"#).is_err());
    }

    #[test]
    fn support_needs_exactly_one_source() {
        let mut cfg = RunConfig::default();
        cfg.game.s = Some(3);
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("exactly one"), "{err}");
        cfg.game.purification_ratio = None;
        cfg.validate().unwrap();
    }

    #[test]
    fn mode_overrides_fraction() {
        let mut cfg = RunConfig::default();
        cfg.mode = Some(Mode::Weak);
        assert_eq!(cfg.data_fraction(), 0.005);
        cfg.mode = Some(Mode::Strong);
        assert_eq!(cfg.data_fraction(), 0.5);
    }

    #[test]
    fn negative_degree_is_a_config_error() {
        let mut cfg = RunConfig::x_sin_x_demo();
        cfg.models.degree = -1;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn dataset_arg_resolution() {
        let mut d = DatasetConfig::default();
        d.set_from_arg("bike");
        assert_eq!(d.name.as_deref(), Some("bike"));
        d.set_from_arg("./my.csv");
        assert_eq!(d.path.as_deref(), Some(Path::new("./my.csv")));
        assert!(d.name.is_none());
    }
}
