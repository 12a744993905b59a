use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("config: {0}")]
    Config(String),
    #[error("not applicable: {}", .0.join("; "))]
    Applicability(Vec<String>),
    #[error("window too small: {0}")]
    Window(String),
    #[error("truncation failed: {what} (achieved {achieved:.3e})")]
    Truncation { what: String, achieved: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{module}::{op}: {source} [input: {input}]")]
    Context {
        module: &'static str,
        op: &'static str,
        input: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn context(self, module: &'static str, op: &'static str, input: impl Into<String>) -> Self {
        Error::Context { module, op, input: input.into(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
