use thiserror::Error;

/// Errors raised by oracles and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-side precondition was violated (dimension mismatch,
    /// parameter outside its admissible interval, infeasible start, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numerical oracle could not produce a trustworthy answer.
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    /// No admissible step was found within the allowed number of reductions.
    #[error("line search failed: no admissible step after {trials} trials (last step {last_step:e})")]
    LineSearch { trials: u32, last_step: f64 },

    /// An inner loop did not meet its outer stopping test within the cap.
    #[error("inner loop at level {level} exceeded {cap} iterations")]
    Runaway { level: usize, cap: u64 },

    /// The feasible set does not provide the requested oracle.
    #[error("feasible set does not provide {0}")]
    Unsupported(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
