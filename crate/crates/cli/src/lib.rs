//! Batch front end for the `diracfp` solver: parses run configurations,
//! dispatches subcommands and writes CSV/JSON artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod commands;
pub mod config;
pub mod expr;
pub mod pipeline;
pub mod sweep;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

pub use commands::Command;
pub use config::{parse_config, ConfigError, RawConfig, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "diracfp",
    version,
    about = "Fixed-point solver for nonlinear Dirac-type equations on 1D models"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sweep worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seed for randomized estimators; overrides `output.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs one invocation and returns the files it wrote.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading {}", cli.config.display()))?;
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    let raw = RawConfig::parse(&text, &base)
        .with_context(|| format!("parsing {}", cli.config.display()))?;
    let mut cfg =
        RunConfig::from_raw(&raw).with_context(|| format!("parsing {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        cfg.output.seed = seed;
    }
    let out = match (&cli.out, &cfg.output.dir) {
        (Some(o), _) => o.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => PathBuf::from("out"),
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ctx = commands::RunContext {
        raw: &raw,
        cfg: &cfg,
        out: &out,
        workers,
    };
    commands::run_command(cli.command, &ctx)
        .with_context(|| format!("{:?} failed", cli.command).to_lowercase())
}
