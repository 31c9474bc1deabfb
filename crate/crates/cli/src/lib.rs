//! Scenario files, built-in instances, reports and invariant checks on top
//! of `pricemech-core`.

pub mod builtin;
pub mod experiment;
pub mod random;
pub mod report;
pub mod scenario;
pub mod verify;

pub use experiment::run_experiment;
pub use report::Report;
pub use scenario::{load_scenario, Scenario, ScenarioError};

/// Everything the command line can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] pricemech_core::Error),
    #[error("guarantee violated: {0}")]
    Violation(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for exceeded capacity limits, 4 for a failed
    /// guarantee check, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) => 2,
            CliError::Engine(pricemech_core::Error::Capacity { .. }) => 3,
            CliError::Engine(_) => 2,
            CliError::Violation(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
