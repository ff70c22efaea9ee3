use thiserror::Error;

/// Failures raised by the simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "Fock truncation at n = {n_trunc} leaves tail probability {tail:.3e} (limit {limit:.3e})"
    )]
    InsufficientTruncation {
        n_trunc: usize,
        tail: f64,
        limit: f64,
    },

    #[error("measurement record has probability {0:.3e}; outcome is impossible")]
    ImpossibleOutcome(f64),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error(
        "circuit oracle disagrees at alpha = {alpha}, T = {transmission}, delta = {delta}: trace distance {distance:.3e}"
    )]
    OracleMismatch {
        alpha: f64,
        transmission: f64,
        delta: f64,
        distance: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
