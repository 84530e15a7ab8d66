//! Error type shared by every module.

use thiserror::Error;

/// Failures reported by the library.
///
/// The CLI maps [`Error::is_config`] errors to exit code 2 and everything else to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("battery state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("battery truncation {state} exceeds the interaction truncation {unitary}")]
    TruncationMismatch { state: usize, unitary: usize },
    #[error("profile tail beyond the truncation carries weight {0:.3e}")]
    TailTruncated(f64),
    #[error("state violates the Dirichlet support: {0}")]
    SupportViolation(String),
    #[error("mixture weights are invalid: {0}")]
    BadWeights(String),
    #[error("the ground level is occupied (|beta_0| = {0:.3e})")]
    GroundOccupied(f64),
    #[error("gate is not of the extremal-level block form: {0}")]
    GateNotBlockForm(String),
    #[error("adaptive quadrature failed to converge (error estimate {0:.3e})")]
    QuadratureNoConvergence(f64),
    #[error("root finding failed: {0}")]
    RootNotFound(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical breakdown.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::NonUnitary(_)
                | Error::InvalidDimension(_)
                | Error::NotNormalized(_)
                | Error::InvalidParameter(_)
                | Error::TruncationMismatch { .. }
                | Error::SupportViolation(_)
                | Error::BadWeights(_)
                | Error::GroundOccupied(_)
                | Error::GateNotBlockForm(_)
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
