use std::process::ExitCode;

use thiserror::Error;

/// Everything that can stop a subcommand, each tied to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Rejected input; the message names the offending field.
    #[error("invalid {field}: {reason}")]
    Usage { field: String, reason: String },

    #[error("cannot read config {path}: {reason}")]
    Config { path: String, reason: String },

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// An estimator produced an impossible value or failed to converge.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("verification failed: {failed} of {total} criteria did not pass")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn usage(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Usage {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed { .. } => 1,
            CliError::Usage { .. } | CliError::Config { .. } | CliError::Output { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

impl From<secrelay::Error> for CliError {
    fn from(e: secrelay::Error) -> Self {
        match e {
            secrelay::Error::InvalidParameter { field, reason } => CliError::usage(field, reason),
            secrelay::Error::Domain(reason) => CliError::usage("parameters", reason),
            e @ (secrelay::Error::InternalConsistency(_) | secrelay::Error::NonConvergence { .. }) => {
                CliError::Internal(e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(CliError::VerifyFailed { failed: 1, total: 5 }.exit_code(), 1);
        assert_eq!(CliError::usage("n_relays", "must be positive").exit_code(), 2);
        assert_eq!(CliError::Internal("x".into()).exit_code(), 3);
    }

    #[test]
    fn core_errors_map_to_usage_or_internal() {
        let usage: CliError = secrelay::Error::Domain("overflow".into()).into();
        assert_eq!(usage.exit_code(), 2);
        let internal: CliError = secrelay::Error::InternalConsistency("sum".into()).into();
        assert_eq!(internal.exit_code(), 3);
    }
}
