use thiserror::Error;

/// Errors raised by the elicitation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElicitError {
    #[error("invalid outcome space: {0}")]
    InvalidSpace(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("tuple arity {got} does not match requested observation count {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("outcome index {index} out of range for a space of {size} outcomes")]
    OutcomeOutOfRange { index: usize, size: usize },

    #[error("report has dimension {got}, expected {expected}")]
    ReportDimension { expected: usize, got: usize },

    #[error("report coordinate {coord} = {value} lies outside [{lo}, {hi}]")]
    ReportOutOfBox {
        coord: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("loss `{0}` carries no identification function")]
    MissingIdentification(String),

    #[error("expected loss is flat over the report box (spread {spread:e}); minimizer is not unique")]
    NonUnique { spread: f64 },

    #[error("distribution outside the domain of `{name}`: {reason}")]
    OutsideDomain { name: String, reason: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("value {value} is not attained by `{property}` on the scanned family")]
    ValueNotAttained { property: String, value: f64 },

    #[error("degenerate level-set sample: {0}")]
    DegenerateSample(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("rank deficient design: {0}")]
    Rank(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, ElicitError>;
