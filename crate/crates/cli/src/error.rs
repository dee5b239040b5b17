//! CLI error split: configuration problems exit with code 1, data and
//! format problems with code 2.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data(message.into())
    }
}

impl From<posebench::traceio::TraceIoError> for CliError {
    fn from(e: posebench::traceio::TraceIoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<posebench::CoreError> for CliError {
    fn from(e: posebench::CoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<posebench::indicators::IndicatorError> for CliError {
    fn from(e: posebench::indicators::IndicatorError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<posebench::criteria::CriterionError> for CliError {
    fn from(e: posebench::criteria::CriterionError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<posebench::optimizer::OptimizerError> for CliError {
    fn from(e: posebench::optimizer::OptimizerError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<posebench::pose::PoseError> for CliError {
    fn from(e: posebench::pose::PoseError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub(crate) fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("cannot access {}: {e}", path.display()))
}
