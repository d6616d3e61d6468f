use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid scenario.
    #[error("configuration error: {0}")]
    Config(String),
    /// Quadrature failure or a failed self-check.
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) => ExitCode::from(2),
            Self::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl From<gwdiv_core::Error> for CliError {
    fn from(e: gwdiv_core::Error) -> Self {
        match e {
            gwdiv_core::Error::Numerical { .. } => Self::Numerical(e.to_string()),
            gwdiv_core::Error::Domain(_) | gwdiv_core::Error::Config(_) => {
                Self::Config(e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_classes() {
        let n: CliError = gwdiv_core::Error::Numerical {
            message: "x".into(),
            achieved: 1.0,
        }
        .into();
        assert!(matches!(n, CliError::Numerical(_)));
        assert_eq!(n.exit_code(), ExitCode::from(3));
        let d: CliError = gwdiv_core::Error::Domain("x".into()).into();
        assert_eq!(d.exit_code(), ExitCode::from(2));
        let c: CliError = gwdiv_core::Error::Config("x".into()).into();
        assert!(matches!(c, CliError::Config(_)));
    }
}
