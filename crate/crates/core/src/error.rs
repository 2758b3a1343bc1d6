use thiserror::Error;

/// Errors raised anywhere in the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("symbol singular at k = {k}")]
    SingularSymbol { k: f64 },

    #[error("degenerate dispersion: Λ(k) vanishes on an interval")]
    DegenerateDispersion,

    #[error("coefficient accuracy not reached for l = {l}: achieved {achieved:e}, wanted {wanted:e}")]
    CoefficientAccuracy { l: i64, achieved: f64, wanted: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, wanted {wanted:e}")]
    Quadrature { achieved: f64, wanted: f64 },

    #[error("decomposition failure: {0}")]
    Decomposition(String),

    #[error("model violates |T| <= 1: singular value {mu} exceeds 1 + 1e-8")]
    ContractionViolated { mu: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("degenerate ground state: many-body gap {gap:e}")]
    DegenerateGround { gap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
