use thiserror::Error;

/// Failures of the lab front end, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] dynbc_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// 2 for configuration and output problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Solver(_) => 3,
            _ => 2,
        }
    }
}
