use thiserror::Error;

/// Errors raised by the simulator core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value or data table is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was applied to an object in the wrong state.
    #[error("state error: {0}")]
    State(String),

    /// Input data (records, curves, files) are malformed or mismatched.
    #[error("input error: {0}")]
    Input(String),

    /// A requested evaluation point lies outside the tabulated range.
    #[error("range error: {0}")]
    Range(String),

    /// The ODE integrator could not advance.
    #[error("integration failed at t = {t:e} s: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    /// Population conservation or positivity was violated beyond tolerance.
    #[error("integrity error at t = {t:e} s: {reason}")]
    Integrity { t: f64, reason: String },

    /// Too many stochastic realizations failed to integrate.
    #[error("ensemble aborted: {failed} of {total} realizations failed (first failing indices: {indices:?})")]
    Ensemble {
        failed: usize,
        total: usize,
        indices: Vec<u64>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
