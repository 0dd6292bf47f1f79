use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two objects that must describe the same structure do not.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("problem too large: {0}")]
    Size(String),
    /// A documented invariant of an input type does not hold.
    #[error("invariant violated: {0}")]
    Invariant(String),
    /// The requested mode needs assumptions the input does not satisfy.
    #[error("mode error: {0}")]
    Mode(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("bracketing failed: {0}")]
    Bracketing(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("label {0} is degenerate (needs at least one positive and one negative)")]
    DegenerateLabel(usize),
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("state error: {0}")]
    State(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
