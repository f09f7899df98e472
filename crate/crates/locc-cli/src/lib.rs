//! Command-line front-end for the LOCC discrimination and marking toolkit.
//!
//! The library half exposes the run configuration, the claim registry and
//! the command implementations so that the acceptance suite can drive them
//! in-process; the `locc-marker` binary is a thin argument parser on top.
//!
//! Exit codes: 0 ok, 1 claim failure, 2 input error, 3 cap exceeded,
//! 4 undecidable fragment, 5 no protocol constructible.

pub mod claims;
pub mod commands;
pub mod config;
pub mod render;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error("no protocol: {0}")]
    NoProtocol(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::CapExceeded(_) => 3,
            CliError::Undecidable(_) => 4,
            CliError::NoProtocol(_) => 5,
        }
    }
}

impl From<locc_core::ensembles::EnsembleError> for CliError {
    fn from(e: locc_core::ensembles::EnsembleError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<locc_core::marking::MarkingError> for CliError {
    fn from(e: locc_core::marking::MarkingError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<locc_core::detect::DetectError> for CliError {
    fn from(e: locc_core::detect::DetectError) -> Self {
        match e {
            locc_core::detect::DetectError::BranchCapExceeded { .. } => {
                CliError::CapExceeded(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<locc_core::upb::UpbError> for CliError {
    fn from(e: locc_core::upb::UpbError) -> Self {
        match e {
            locc_core::upb::UpbError::UndecidableFragment(_) => {
                CliError::Undecidable(e.to_string())
            }
            locc_core::upb::UpbError::Detect(
                locc_core::detect::DetectError::BranchCapExceeded { .. },
            ) => CliError::CapExceeded(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<locc_core::protocol::ProtocolError> for CliError {
    fn from(e: locc_core::protocol::ProtocolError) -> Self {
        match e {
            locc_core::protocol::ProtocolError::MissingCertificate(_) => {
                CliError::NoProtocol(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<locc_core::numkernel::NumError> for CliError {
    fn from(e: locc_core::numkernel::NumError) -> Self {
        CliError::Input(e.to_string())
    }
}
