use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Variants split into two families, see [`Error::is_numerical`]: bad
/// input that violates an operation's precondition, and numerical failure
/// (truncation leakage, quadrature that does not settle, and so on).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} index {index} out of range (maximum {max})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("truncated tail mass {mass:.3e} exceeds tolerance {tolerance:.1e}")]
    TailMass { mass: f64, tolerance: f64 },

    #[error("truncation leakage {leakage:.3e} in column {column} exceeds tolerance {tolerance:.1e}")]
    Leakage {
        column: usize,
        leakage: f64,
        tolerance: f64,
    },

    #[error("probability {value:.3e} at n = {index} is negative beyond roundoff")]
    NegativeProbability { index: usize, value: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("phase-space grids differ")]
    GridMismatch,

    #[error("field not contained in grid: {0}")]
    Containment(String),

    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    #[error("zone {n} lies beyond the wavefront (last feasible zone boundary {max})")]
    InfeasibleZone { n: usize, max: usize },
}

impl Error {
    /// `true` for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TailMass { .. }
                | Error::Leakage { .. }
                | Error::NegativeProbability { .. }
                | Error::NonConvergence { .. }
                | Error::Containment(_)
                | Error::Inconsistent(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
