use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("configuration error: {key} {message}")]
pub struct ConfigError {
    pub key: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            key,
            message: message.into(),
        }
    }
}
