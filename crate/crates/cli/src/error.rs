use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lpocv::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{failed} verification check(s) failed")]
    VerifyFailed { failed: usize },
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "io_error",
            CliError::Parse { .. } => "parse_error",
            CliError::Usage(_) => "usage_error",
            CliError::Json(_) => "invalid_json",
            CliError::VerifyFailed { .. } => "verify_failed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::VerifyFailed { .. } => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut err = json!({ "code": self.code(), "message": self.to_string() });
        if let CliError::Parse { line, path, .. } = self {
            err["line"] = json!(line);
            err["path"] = json!(path);
        }
        json!({ "schema_version": crate::output::SCHEMA_VERSION, "error": err })
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
