//! Command-line driver for the `canonmap` library: scenario runs that write
//! trajectory CSV files, map analysis reports, and canonical-map reports.

pub mod commands;
pub mod config;
pub mod sweep;

use canonmap::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, unreadable input or unwritable output.
    #[error("{0}")]
    Config(String),
    /// The numerics refused, typically a non-invertible map.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::IntegrationAborted { time, cause, .. } => {
                let msg = format!("integration aborted at t = {time}: {cause}");
                match Self::from(*cause) {
                    Self::Numerical(_) => Self::Numerical(msg),
                    Self::Config(_) => Self::Config(msg),
                }
            }
            Error::SingularTime { .. }
            | Error::FarFromIdentity(_)
            | Error::NotCompletelyPositive(_) => Self::Numerical(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(e.to_string())
    }
}
