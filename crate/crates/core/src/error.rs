use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid delay configuration: {0}")]
    InvalidConfig(String),

    #[error("signal too short: need at least {required} samples, got {got}")]
    SignalTooShort { required: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("duplicate eigenvalues at positions {0} and {1}")]
    DuplicateEigenvalues(usize, usize),

    #[error("mode {0} unobservable: its mode shape column is zero")]
    UnobservableMode(usize),

    #[error("unpaired complex mode {0}")]
    UnpairedMode(usize),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "near-zero divisor {divisor:e} for non-resonant term (mode {mode}, exponents {exponents:?}); \
         increase tol_res so the term is treated as resonant"
    )]
    SmallDivisor {
        mode: usize,
        exponents: Vec<u32>,
        divisor: f64,
    },

    #[error("outside normal-form validity radius: {0}")]
    OutsideValidityRadius(String),

    #[error("integration step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("non-generic observable: {0}")]
    NonGeneric(String),

    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
