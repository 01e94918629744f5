//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A closed-form expression was asked to operate outside the regime it was derived for.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("mismatch: {0}")]
    Mismatch(String),

    /// Division by a vanishing reference (zero carrier, zero transmission, undefined phase).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("out of range: {0}")]
    Range(String),

    #[error("singular system (condition estimate {condition:.3e}): {context}")]
    Singular { condition: f64, context: String },

    #[error("harmonic truncation did not converge: {0}")]
    Convergence(String),

    #[error("sampling grid error: {0}")]
    Grid(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown sweep parameter `{name}` (valid: {valid})")]
    UnknownParam { name: String, valid: String },

    #[error("at {freq_hz} Hz: {source}")]
    AtFrequency {
        freq_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_frequency(self, freq_hz: f64) -> Self {
        Error::AtFrequency {
            freq_hz,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
