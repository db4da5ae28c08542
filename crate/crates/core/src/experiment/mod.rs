//! Configurable experiment runs built on the core pipeline.

mod config;
mod harness;
mod smoothing;

pub use config::{
    DatasetConfig, Family, GameSection, Mode, ModelsConfig, RoundsRule, RunConfig, SplitConfig, SweepConfig, UqConfig,
    SYNTHETIC_NAMES,
};
pub use harness::{
    compare, demo_x_sin_x, predict_rows, rounds_for_ratio, run, sweep_fraction, sweep_purification, Aggregate,
    DemoOutcome, ExperimentReport, RepeatRecord, RunOutcome, SweepPoint, SweepReport,
};
pub use smoothing::local_linear;
