//! Command-line front end: `ingest`, `train`, `evaluate`, `recommend` and
//! `ablate`.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 numeric abort,
//! 1 for anything else (for example an unwritable output folder).

pub mod commands;
pub mod config;
pub mod manifest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::data::DataError;
use crate::gan::GanError;
use crate::metrics::EvalError;
use crate::nn::NnError;

pub use commands::{
    cmd_ablate, cmd_evaluate, cmd_ingest, cmd_recommend, cmd_train, AblationReport, AblationRow, IngestStats, LogStats,
    OutputLayout, TrainOutcome,
};
pub use config::{RunConfig, SEED_ENV};
pub use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric abort: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io(io) => CliError::Io(io),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(NnError::NonFinite { .. }) => CliError::Numeric(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<GanError> for CliError {
    fn from(e: GanError) -> Self {
        match e {
            GanError::NonFiniteLoss { .. } | GanError::Nn(NnError::NonFinite { .. }) => {
                CliError::Numeric(e.to_string())
            }
            GanError::InvalidConfig(_) | GanError::Rejuvenation(_) => CliError::Config(e.to_string()),
            GanError::Eval(inner) => inner.into(),
            GanError::Data(inner) => inner.into(),
            GanError::Io(io) => CliError::Io(io),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "coldgan",
    version,
    about = "Cold-start recommendation with a rejuvenating GAN"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML run config.
    #[arg(long, short)]
    pub config: PathBuf,
    /// Override a config value, e.g. `--set training.epochs=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Root seed; beats the file and COLDGAN_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output folder; beats `output_dir` in the file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ConfigArgs {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config, &self.overrides, self.seed)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and filter the ratings file; write a canonical dump and stats.
    Ingest(ConfigArgs),
    /// Train and write the best checkpoint and the loss history.
    Train(ConfigArgs),
    /// Score the test cohort with a checkpoint.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Defaults to `<output_dir>/checkpoints/model.cgan`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Also report popularity and random baselines.
        #[arg(long)]
        baselines: bool,
    },
    /// Recommend for one new user from a CSV of `item_id,rating,timestamp`.
    Recommend {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, short, default_value_t = 10)]
        k: usize,
    },
    /// Run the rejuvenation × relevant-loss grid over the configured seeds.
    Ablate(ConfigArgs),
}

/// Runs a parsed command line, printing results to `stdout` and errors to
/// `stderr`. Returns the process exit code.
pub fn run<W: Write, E: Write>(cli: Cli, stdout: &mut W, stderr: &mut E) -> i32 {
    match dispatch(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "coldgan: {e}");
            e.exit_code()
        }
    }
}

fn dispatch<W: Write, E: Write>(cli: Cli, out: &mut W, err: &mut E) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(args) => {
            let stats = cmd_ingest(&args.load()?)?;
            write!(out, "{}", stats.to_table())?;
        }
        Command::Train(args) => {
            let t = cmd_train(&args.load()?)?;
            writeln!(
                out,
                "trained {} epochs on {} users (best epoch {}); checkpoint {}",
                t.epochs_run,
                t.train_users,
                t.best_epoch.map_or("none".into(), |e| e.to_string()),
                t.checkpoint.display()
            )?;
        }
        Command::Evaluate {
            config,
            checkpoint,
            baselines,
        } => {
            let e = cmd_evaluate(&config.load()?, checkpoint.as_deref(), baselines)?;
            write!(out, "{}", e.report.to_table())?;
            if let Some(b) = e.baselines {
                writeln!(out, "popularity:")?;
                write!(out, "{}", b.popularity.to_table())?;
                writeln!(out, "random:")?;
                write!(out, "{}", b.random.to_table())?;
            }
        }
        Command::Recommend { checkpoint, ratings, k } => {
            let text =
                std::fs::read_to_string(&ratings).map_err(|e| CliError::Data(format!("{}: {e}", ratings.display())))?;
            let r = cmd_recommend(&checkpoint, &text, k)?;
            for id in &r.unknown_items {
                writeln!(err, "coldgan: skipping unknown item {id:?}")?;
            }
            commands::write_recommendations(&r.items, out)?;
        }
        Command::Ablate(args) => {
            let cfg = args.load()?;
            let report = cmd_ablate(&cfg)?;
            write!(out, "{}", report.to_table(&cfg.evaluation.ks))?;
        }
    }
    Ok(())
}
