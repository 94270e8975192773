use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("window error: {what} index {index} outside [{lo}, {hi}]")]
    Window {
        what: &'static str,
        index: i64,
        lo: i64,
        hi: i64,
    },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("conditioning failed: {0}")]
    Conditioning(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
