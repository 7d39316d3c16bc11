use okbody_core::{Error, ErrorClass};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("certificate invalid: {0}")]
    InvalidCertificate(String),
    /// A numerical property check did not hold.
    #[error("{0}")]
    CheckFailed(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        source: Box<CliError>,
    },
}

impl CliError {
    /// Process exit status: 2 precondition, 3 truncation, 4 certificate.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Precondition => 2,
                ErrorClass::Truncation => 3,
                ErrorClass::Certificate => 4,
                ErrorClass::Other => 1,
            },
            CliError::Io { .. } | CliError::Json { .. } | CliError::Usage(_) => 2,
            CliError::InvalidCertificate(_) => 4,
            CliError::CheckFailed(_) => 1,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::LatticeNotGenerated).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::InvalidCertificate("x".into()).exit_code(), 4);
        assert_eq!(CliError::CheckFailed("x".into()).exit_code(), 1);
        let staged = CliError::Stage {
            stage: "gamma".into(),
            source: Box::new(CliError::InvalidCertificate("x".into())),
        };
        assert_eq!(staged.exit_code(), 4);
    }
}
