use alloc::string::String;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),

    /// The requested energy sits on (or within `pole_epsilon` of) a
    /// divergence of the coefficient recurrences.
    #[error("energy {energy} is within {distance:e} of the pole at {pole}")]
    Pole { energy: f64, pole: f64, distance: f64 },

    #[error("series did not converge: last term {last_term:e} vs partial sum {partial_sum:e}")]
    Convergence { last_term: f64, partial_sum: f64 },

    /// More than one direction of the G-matrix is numerically singular.
    #[error("near-degenerate null space at E = {energy}: singular value ratio {ratio:e}")]
    DegenerateNullSpace { energy: f64, ratio: f64 },

    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigenbasis misses weight {defect:e} of the initial state")]
    Completeness { defect: f64 },

    #[error("SDP solver failed after {iterations} iterations: {reason}")]
    SolverFailure { iterations: usize, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
