use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{what} {index} out of range (max {bound})")]
    OutOfRange { what: &'static str, index: usize, bound: usize },
    #[error("singular steady-state system: {0}")]
    Singular(String),
    #[error("steady-state residual {achieved:.3e} exceeds tolerance {tol:.3e}")]
    Residual { achieved: f64, tol: f64 },
    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("density matrix invariant violated: {0}")]
    Invariant(String),
    #[error("Fock truncation cap {cap} reached with top-level population {tail:.3e}")]
    TruncationCap { cap: usize, tail: f64 },
    #[error("Fock truncation cap {cap} is below the prior bound {bound}")]
    TruncationBound { cap: usize, bound: usize },
    #[error("time integration unstable: trace drift {drift:.3e}")]
    Unstable { drift: f64 },
    #[error("classical transient not converged: amplitude drift {drift:.3e} between the last two periods")]
    Transient { drift: f64 },
    #[error("vanishing denominator in the coupled-oscillator response")]
    VanishingDenominator,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
