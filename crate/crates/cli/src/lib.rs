//! Scenario runner for `fts-core`: loads TOML scenarios, simulates them, certifies the
//! result and writes CSV/JSON artifacts.

pub mod output;
pub mod run;
pub mod scenario;
pub mod sweep;

use thiserror::Error;

pub use run::{execute, RunOptions, RunOutcome};
pub use scenario::{Built, Scenario};
pub use sweep::{run_sweep, SweepFile, SweepRow};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SIMULATION: i32 = 3;
    pub const CERTIFICATE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Core(#[from] fts_core::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fts_core::Error as E;
        match self {
            CliError::Parse(_) | CliError::Scenario(_) => exit::CONFIG,
            CliError::Core(E::Diverged { .. } | E::Zeno { .. } | E::OutsideDomain { .. } | E::Sliding { .. }) => {
                exit::SIMULATION
            }
            CliError::Core(E::NotFiniteTime { .. }) => exit::CERTIFICATE,
            CliError::Core(_) => exit::CONFIG,
            CliError::Io(..) | CliError::Csv(_) | CliError::Json(_) => exit::IO,
        }
    }
}
