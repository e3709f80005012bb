use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}, field '{field}': {message}")]
    Config { line: usize, field: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Compute(#[from] heatkern::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(line: usize, field: &str, message: impl Into<String>) -> Self {
        CliError::Config { line, field: field.to_string(), message: message.into() }
    }
}
