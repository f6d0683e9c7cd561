//! CLI error taxonomy, mapped onto process exit codes:
//! 1 usage, 2 data, 3 numerical.

use std::fmt;

use aeprob_core::simulate::SimulateError;
use aeprob_core::{EstimatorError, ModelError, VarianceError};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations (exit code 1).
    Usage(String),
    /// Unreadable or invalid input data (exit code 2).
    Data(String),
    /// A computation could not be carried out (exit code 3).
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) | CliError::Numeric(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<VarianceError> for CliError {
    fn from(e: VarianceError) -> Self {
        match e {
            VarianceError::TooFewReplicates | VarianceError::MissingBootstrapConfig => {
                CliError::Usage(e.to_string())
            }
            VarianceError::TooManyDegenerateReplicates => CliError::Numeric(e.to_string()),
            VarianceError::Estimator(inner) => inner.into(),
        }
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        match e {
            SimulateError::TooFewRuns => CliError::Usage(e.to_string()),
            SimulateError::CatalogParse { .. } | SimulateError::InvalidScenario(_) => {
                CliError::Data(e.to_string())
            }
            SimulateError::Variance(inner) => inner.into(),
            SimulateError::UnintegrableForm { .. }
            | SimulateError::RootNotBracketed
            | SimulateError::TargetUnreachable
            | SimulateError::CensoringNotCalibrated { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
