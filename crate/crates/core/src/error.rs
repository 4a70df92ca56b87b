use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Conditioning on an Alice outcome of zero probability.
    #[error("degenerate conditioning: outcome probability denominator {denominator}")]
    DegenerateConditioning { denominator: f64 },

    #[error("conditional expectation undefined for Alice outcome {outcome}: no events")]
    UndefinedConditional { outcome: i8 },

    #[error("count table for setting {setting} is empty")]
    EmptyTable { setting: usize },

    #[error("visibility undefined: no conclusive Alice events")]
    NoConclusiveEvents,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation error at line {line}: {message}")]
    Validation { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DegenerateConditioning { .. } => "degenerate_conditioning",
            Error::UndefinedConditional { .. } => "undefined_conditional",
            Error::EmptyTable { .. } => "empty_table",
            Error::NoConclusiveEvents => "no_conclusive_events",
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
