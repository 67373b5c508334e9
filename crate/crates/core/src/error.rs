use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("no failing test in spectrum")]
    NoFailingTest,

    #[error("unknown {kind} `{id}`")]
    UnknownReference { kind: &'static str, id: String },

    #[error("malformed trace for test `{test}`: {reason}")]
    MalformedTrace { test: String, reason: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("rank {after} lies outside the original tie [{min}, {max}]")]
    LocalityViolation { min: String, max: String, after: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("cannot generate subject: {0}")]
    Generation(String),
}

impl Error {
    pub(crate) fn unknown(kind: &'static str, id: impl Into<String>) -> Self {
        Error::UnknownReference { kind, id: id.into() }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
