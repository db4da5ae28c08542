use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtb::data::registry;
use dtb::experiment::{self, Mode, RoundsRule, RunConfig};
use dtb::uq::write_predictions_csv;
use dtb::Result;

/// Decision-theoretic bootstrapping: robust ensembles and uncertainty
/// intervals from a repeated zero-sum game between models and test
/// distributions.
#[derive(Parser)]
#[command(name = "dtb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the ensemble, play the game and write result.json and predictions.csv.
    Run(Common),
    /// Repeated DT-versus-uniform comparison; writes report.json.
    Compare(Common),
    /// Mean losses against the purification ratio; writes sweep.csv and report.json.
    SweepPurification {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ratios in (0, 1].
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        /// Keep K fixed at game.rounds instead of K = 5 / ratio.
        #[arg(long)]
        fixed_rounds: bool,
    },
    /// Mean losses against the per-model data fraction; writes sweep.csv and report.json.
    SweepFraction {
        #[command(flatten)]
        common: Common,
        /// Comma-separated fractions in (0, 1].
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
    },
    /// Download a registry dataset into the cache and print its path.
    Fetch {
        name: String,
        #[arg(long, default_value = "data-cache")]
        cache_dir: PathBuf,
    },
    /// The 35-sample x sin x demonstration with a 50-point evaluation grid.
    DemoXsinx(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Registry or synthetic dataset name, or a CSV path.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Interval half-width in ensemble standard deviations.
    #[arg(long)]
    z: Option<f64>,
    /// Use the whole train-UQ pool for both training and the game.
    #[arg(long)]
    t_equals_u: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Weak,
    Strong,
}

impl Common {
    fn config(&self, base: RunConfig) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => base,
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(name) = &self.dataset {
            cfg.dataset.set_from_arg(name);
        }
        if let Some(mode) = self.mode {
            cfg.mode = Some(match mode {
                ModeArg::Weak => Mode::Weak,
                ModeArg::Strong => Mode::Strong,
            });
        }
        if let Some(repeats) = self.repeats {
            cfg.repeats = repeats;
        }
        if let Some(z) = self.z {
            cfg.uq.z = z;
        }
        if self.t_equals_u {
            cfg.split.t_equals_u = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(out: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), contents)?;
    Ok(())
}

fn write_predictions(out: &Path, name: &str, preds: &[dtb::uq::PointPrediction], truth: &[f64]) -> Result<()> {
    fs::create_dir_all(out)?;
    let file = fs::File::create(out.join(name))?;
    write_predictions_csv(BufWriter::new(file), preds, Some(truth))
}

/// Wall time goes to its own file so the reports stay byte-identical.
fn log_timing(out: &Path, command: &str, started: Instant) -> Result<()> {
    write(out, "timing.log", &format!("{command} wall_time_secs={:.3}\n", started.elapsed().as_secs_f64()))
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn execute(command: Command) -> Result<()> {
    let started = Instant::now();
    match command {
        Command::Run(common) => {
            let cfg = common.config(RunConfig::default())?;
            let outcome = experiment::run(&cfg)?;
            write(&common.out, "result.json", &(outcome.result.to_json()? + "\n"))?;
            write(&common.out, "histogram.json", &pretty(&outcome.value_histogram)?)?;
            write_predictions(&common.out, "predictions.csv", &outcome.predictions, &outcome.truth)?;
            write(&common.out, "config.json", &(cfg.to_json()? + "\n"))?;
            log_timing(&common.out, "run", started)?;
            println!("coverage {:.4}", outcome.coverage);
        }
        Command::Compare(common) => {
            let cfg = common.config(RunConfig::default())?;
            let report = experiment::compare(&cfg)?;
            write(&common.out, "report.json", &pretty(&report)?)?;
            log_timing(&common.out, "compare", started)?;
            let a = report.aggregate;
            println!(
                "max_fold dt {:.4} uniform {:.4} | overall dt {:.4} uniform {:.4}",
                a.dt_max_fold, a.uniform_max_fold, a.dt_overall, a.uniform_overall
            );
        }
        Command::SweepPurification {
            common,
            ratios,
            fixed_rounds,
        } => {
            let mut cfg = common.config(RunConfig::default())?;
            if let Some(ratios) = ratios {
                cfg.sweep.ratios = ratios;
            }
            if fixed_rounds {
                cfg.sweep.rounds_rule = RoundsRule::Fixed;
            }
            let report = experiment::sweep_purification(&cfg)?;
            write(&common.out, "sweep.csv", &report.to_csv())?;
            write(&common.out, "report.json", &pretty(&report)?)?;
            log_timing(&common.out, "sweep-purification", started)?;
            println!("smoothed dt max-fold minimum at ratio {}", report.min_max_fold_at);
        }
        Command::SweepFraction { common, fractions } => {
            let mut cfg = common.config(RunConfig::default())?;
            if let Some(fractions) = fractions {
                cfg.sweep.fractions = fractions;
            }
            let report = experiment::sweep_fraction(&cfg)?;
            write(&common.out, "sweep.csv", &report.to_csv())?;
            write(&common.out, "report.json", &pretty(&report)?)?;
            log_timing(&common.out, "sweep-fraction", started)?;
        }
        Command::Fetch { name, cache_dir } => {
            let path = registry::fetch_registered(&name, &cache_dir)?;
            println!("{}", path.display());
        }
        Command::DemoXsinx(common) => {
            let cfg = common.config(RunConfig::x_sin_x_demo())?;
            let demo = experiment::demo_x_sin_x(&cfg, 50)?;
            write(&common.out, "result.json", &(demo.run.result.to_json()? + "\n"))?;
            write_predictions(&common.out, "predictions.csv", &demo.run.predictions, &demo.run.truth)?;
            write_predictions(&common.out, "grid.csv", &demo.grid, &demo.grid_truth)?;
            write(&common.out, "config.json", &(cfg.to_json()? + "\n"))?;
            log_timing(&common.out, "demo-xsinx", started)?;
            println!("grid coverage {:.4}", demo.grid_coverage);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => err.exit(),
        Err(err) => {
            let body = serde_json::json!({
                "error": "usage",
                "message": err.render().to_string().trim_end(),
                "exit_code": 2,
            });
            eprintln!("{body}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let body = serde_json::json!({
                "error": err.kind(),
                "message": err.to_string(),
                "exit_code": err.exit_code(),
            });
            eprintln!("{body}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
