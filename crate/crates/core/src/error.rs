use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input failed a value-level check (bad probability, negative parameter, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range for {len} {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// `q` assigns zero mass where `p` does not.
    #[error("KL divergence undefined: q[{index}] = 0 but p[{index}] = {p} > 0")]
    AbsoluteContinuity { index: usize, p: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    /// Experiment configuration rejected; `line` points into the source document when known.
    #[error("{}", config_message(.field, .line, .message))]
    Config {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

fn config_message(field: &str, line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config error at line {l}, field `{field}`: {message}"),
        None => format!("config error, field `{field}`: {message}"),
    }
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            line: None,
            message: message.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
