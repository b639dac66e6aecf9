use thiserror::Error;

use crate::classify::ClassifyError;
use crate::cli::CliError;
use crate::ingest::IngestError;
use crate::metrics::MetricsError;
use crate::render::RenderError;
use crate::synth::SynthError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error. Every variant prefixes its message with the module that
/// raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ingest: {0}")]
    Ingest(#[from] IngestError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("classify: {0}")]
    Classify(#[from] ClassifyError),
    #[error("render: {0}")]
    Render(#[from] RenderError),
    #[error("synth: {0}")]
    Synth(#[from] SynthError),
    #[error("cli: {0}")]
    Cli(#[from] CliError),
}
