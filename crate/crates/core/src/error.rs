use alloc::boxed::Box;
use alloc::string::String;

use crate::simulator::HybridTrajectory;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the caller's input does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration is structurally valid but violates a modelling assumption
    /// (an uncontrollable distinguished mode, a mismatched FTS mode, ...).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The state became non-finite.
    #[error("trajectory diverged at t = {t}")]
    Diverged {
        t: f64,
        /// Everything recorded up to the last finite sample.
        partial: Box<HybridTrajectory>,
    },

    /// More than the allowed number of jumps happened inside one guard window.
    #[error("zeno guard tripped at t = {t}: {jumps} jumps inside a {window} s window")]
    Zeno { t: f64, jumps: usize, window: f64 },

    /// The state left the flow set with no jump available.
    #[error("state left the flow set outside the jump set at t = {t}")]
    OutsideDomain { t: f64 },

    /// The switching law produced a sliding motion on a switching surface.
    #[error("sliding mode on the surface between modes {from} and {to} at t = {t}")]
    Sliding { t: f64, from: usize, to: usize },

    /// The FTS decay inequality cannot hold: the Lyapunov function does not decrease.
    #[error("mode {mode} is not finite-time stable along the trajectory: {reason}")]
    NotFiniteTime { mode: usize, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
