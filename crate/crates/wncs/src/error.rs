//! Crate-wide error type.

use crate::model::StabilityVerdict;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// One or more configuration invariants failed; each entry carries the
    /// offending field path.
    #[error("invalid configuration:\n  {}", violations.join("\n  "))]
    InvalidConfig { violations: Vec<String> },

    /// Discretization produced a non-finite lifted plant (growth rate times
    /// horizon overflows the exponential).
    #[error("unrepresentable plant: {0}")]
    UnrepresentablePlant(String),

    /// The requested dropout rate is not below the plant's maximum tolerable
    /// rate, so the Riccati equation has no positive solution.
    #[error("no stabilizing solution: dropout rate {q} >= maximum tolerable rate {q_max}")]
    NoStabilizingSolution { q: f64, q_max: f64 },

    /// An iteration failed to converge where convergence is guaranteed;
    /// indicates a bug or pathological input, never silently ignored.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Instance exceeds an enumeration or horizon cap.
    #[error("problem too large: {0}")]
    TooLarge(String),

    /// A specialized test was invoked on an instance outside its domain.
    #[error("wrong specialization: {0}")]
    WrongSpecialization(String),

    /// The linear-program solver broke down (certificate check failed or
    /// pivot limit hit).
    #[error("LP solver failure: {0}")]
    SolverFailure(String),

    /// The instance fails the exact stability condition.
    #[error("not stabilizable: binding constraint {}, slack {:.6e}",
            verdict.binding_constraint.as_deref().unwrap_or("?"), verdict.slack)]
    NotStabilizable { verdict: StabilityVerdict },

    /// Heterogeneous-period synthesis: the big-frame program is infeasible.
    /// The condition is sufficient only, so this is *not* an instability
    /// verdict.
    #[error("sufficient condition not met: {0}")]
    SufficientConditionNotMet(String),

    /// Not enough samples or frames to run a statistical procedure.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
