use serde_json::json;
use thiserror::Error;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Io = 1,
    Validation = 2,
    Solver = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, flag, grid or parameter value.
    #[error("invalid input: {0}")]
    Validation(String),
    /// One or more rows could not be solved; completed rows were written.
    #[error("{failed_rows} row(s) failed; first error: {first}")]
    Solver { failed_rows: usize, first: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit(&self) -> Exit {
        match self {
            CliError::Validation(_) => Exit::Validation,
            CliError::Solver { .. } => Exit::Solver,
            CliError::Io(_) => Exit::Io,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        let rec = match self {
            CliError::Validation(msg) => json!({"error": "validation", "message": msg}),
            CliError::Solver { failed_rows, first } => {
                json!({"error": "solver", "failed_rows": failed_rows, "message": first})
            }
            CliError::Io(e) => json!({"error": "io", "message": e.to_string()}),
        };
        rec.to_string()
    }
}

impl From<mu_audit::AuditError> for CliError {
    fn from(e: mu_audit::AuditError) -> Self {
        CliError::Validation(e.to_string())
    }
}
