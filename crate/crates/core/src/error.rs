use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("value {value} outside admissible range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("characteristic-function product formula needs independent coefficients")]
    DependentCoefficients,

    /// The normalizing integral of the Bayes formula vanished.
    #[error("zero evidence: {0}")]
    ZeroEvidence(String),

    #[error("rejection sampler acceptance rate {rate:.4} fell below {floor}")]
    LowAcceptance { rate: f64, floor: f64 },

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("unknown {kind} `{name}`; registered: {known}")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
