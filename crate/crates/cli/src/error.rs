//! Error classification for the exit-code contract:
//! 0 success, 1 validation, 2 numerical failure, 3 i/o.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<optomech::config::ConfigError> for CliError {
    fn from(e: optomech::config::ConfigError) -> Self {
        match e {
            optomech::config::ConfigError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<optomech::params::ParamError> for CliError {
    fn from(e: optomech::params::ParamError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<optomech::modes::ModesError> for CliError {
    fn from(e: optomech::modes::ModesError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<optomech::spectra::SpectraError> for CliError {
    fn from(e: optomech::spectra::SpectraError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<optomech::estimation::EstimationError> for CliError {
    fn from(e: optomech::estimation::EstimationError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<optomech::langevin::SimError> for CliError {
    fn from(e: optomech::langevin::SimError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<optomech::backaction::BackactionError> for CliError {
    fn from(e: optomech::backaction::BackactionError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<optomech::io::IoError> for CliError {
    fn from(e: optomech::io::IoError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
