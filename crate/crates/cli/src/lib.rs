//! Experiment harness around the dynsketch library: data ingestion,
//! synthetic instance generation, and drivers that measure error against
//! exact oracles with the query/total timing split.

pub mod experiment;
pub mod io;
pub mod synth;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] dynsketch::Error),
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
