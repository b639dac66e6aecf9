//! Command-line front end: one JSON config, flag overrides, static outputs.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::ingest::GroupId;
use crate::metrics::RankBasis;

pub use commands::{
    cmd_render_dashboard, cmd_render_map, cmd_run, cmd_synth, cmd_validate, load_inputs, Inputs, Outcome,
};
pub use config::{Overrides, RegimeBounds, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Parser)]
#[command(name = "rankdiff", version, about = "Rank-difference disparity analytics")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub basis: Option<RankBasis>,
    /// Exclusive lower bound of the persistence regime.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub regime_min: Option<f64>,
    /// Inclusive upper bound of the persistence regime.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub regime_max: Option<f64>,
    /// Group used for classification maps and the index page.
    #[arg(long, global = true)]
    pub group: Option<GroupId>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load all inputs and print the data-quality report.
    Validate,
    /// Compute everything and write the output tree.
    Run,
    /// Write a synthetic fixture from a generator spec.
    Synth {
        spec: PathBuf,
    },
    /// Write only the classification map.
    RenderMap,
    /// Write one municipality dashboard.
    RenderDashboard {
        #[arg(long)]
        id: String,
    },
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            basis: self.basis,
            regime_min: self.regime_min,
            regime_max: self.regime_max,
            group: self.group,
            out: self.out.clone(),
        }
    }

    fn run_config(&self) -> crate::Result<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
        let mut cfg = RunConfig::load(path)?;
        cfg.apply(&self.overrides());
        Ok(cfg)
    }
}

/// Executes a parsed command line. Reports go to stdout, written paths
/// to stderr.
pub fn execute(cli: &Cli) -> crate::Result<Outcome> {
    match &cli.command {
        Command::Validate => {
            let (outcome, report) = cmd_validate(&cli.run_config()?)?;
            print!("{report}");
            Ok(outcome)
        }
        Command::Run => {
            let (outcome, written) = cmd_run(&cli.run_config()?)?;
            eprintln!("wrote {} files", written.len());
            Ok(outcome)
        }
        Command::Synth { spec } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            for path in cmd_synth(spec, &out)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(Outcome::Clean)
        }
        Command::RenderMap => {
            let (outcome, path) = cmd_render_map(&cli.run_config()?)?;
            eprintln!("wrote {}", path.display());
            Ok(outcome)
        }
        Command::RenderDashboard { id } => {
            let (outcome, path) = cmd_render_dashboard(&cli.run_config()?, id)?;
            eprintln!("wrote {}", path.display());
            Ok(outcome)
        }
    }
}
