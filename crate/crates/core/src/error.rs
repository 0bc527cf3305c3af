use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the design, evaluation and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid drive: {0}")]
    InvalidDrive(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "quadrature did not converge after {refinements} refinements \
         (last estimate {last}, previous {previous})"
    )]
    Quadrature {
        refinements: u32,
        last: Complex64,
        previous: Complex64,
    },

    #[error("solver failed after {iterations} iterations: {reason}")]
    Solver { iterations: usize, reason: String },

    #[error(
        "Fock truncation overflow on branch {branch}: top-level population {population:.3e} \
         exceeds {tolerance:.1e}; increase n_max"
    )]
    TruncationOverflow {
        branch: i8,
        population: f64,
        tolerance: f64,
    },

    #[error("non-finite amplitudes encountered while propagating branch {0}")]
    NonFinite(i8),

    #[error("detuning errors are not representable in the closed form; use the oracle")]
    DetuningRequiresOracle,

    #[error("infidelity below 1e-14 inside the fit window; widen the window")]
    NumericallyFlat,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure comes from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Solver { .. }
                | Error::TruncationOverflow { .. }
                | Error::NonFinite(_)
                | Error::NumericallyFlat
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
