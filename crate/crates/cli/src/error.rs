use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } | CliError::Replay(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<ophydro::Error> for CliError {
    fn from(e: ophydro::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let numerical = ophydro::Error::NoConvergence {
            routine: "bisection",
            iterations: 3,
            residual: 1.0,
        };
        assert_eq!(CliError::from(numerical).exit_code(), 3);
        let bad = ophydro::Error::DimensionMismatch { expected: 2, got: 3 };
        assert_eq!(CliError::from(bad).exit_code(), 2);
        assert_eq!(CliError::Replay("x".into()).exit_code(), 1);
    }
}
