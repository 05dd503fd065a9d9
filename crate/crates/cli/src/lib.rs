//! Batch front-end for `fracbellman`: experiment configs, solve-and-check
//! pipelines over a sweep of orders, CSV/SVG reports and oracle printouts.

pub mod config;
pub mod oracle;
pub mod pipeline;

pub use config::{Check, ConfigError, Experiment, ExperimentConfig};
pub use pipeline::{run_sigma, run_solve, run_sweep, SigmaOutcome, SweepOutcome};

/// Failure of a CLI command, with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("{stage}: {source}")]
    Run { stage: String, source: fracbellman::Error },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for schema violations, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Exit status when every check passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when the run finished but some check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
