use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no classical limit: denominator vanishes at u = 1")]
    LimitPole,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("rewriting exceeded the step budget ({0} steps); suspect a bad ring specification")]
    RewriteDivergence(usize),

    #[error("index error: {0}")]
    Index(String),

    #[error("vanishing normalization correlator")]
    SingularNormalization,

    #[error("quadrature failed to converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("gamma-function pole at {0}")]
    GammaPole(String),

    #[error("asymptotic fit failed: {0}")]
    FitFailure(String),

    #[error("gauss decomposition failed: vanishing leading minor {0}")]
    DecompositionFailure(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
