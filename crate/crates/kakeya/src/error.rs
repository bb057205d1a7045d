use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KakeyaError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("sampling error: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, KakeyaError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(KakeyaError::Input(msg.into()))
}
