//! Experiment runner around [`qde_core`]: declarative configs, CSV/PGM
//! emission with a JSON manifest, and a self-check command.
//!
//! The binary (`qde`) is a thin shell over this library so the integration
//! tests can drive configs and runs in-process.

pub mod config;
pub mod runner;
pub mod selfcheck;

use std::fmt;

/// Failure classes, one per documented exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent configuration (exit 2).
    Config(String),
    /// A numerical contract was violated: non-unitary input, invalid density,
    /// failed decomposition (exit 3).
    Numerical(String),
    /// A resource cap was hit; the message names the limiting parameter
    /// (exit 4).
    Resource(String),
    /// Filesystem trouble (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Resource(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical contract violation: {m}"),
            CliError::Resource(m) => write!(f, "resource cap: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qde_core::EntropyError> for CliError {
    fn from(e: qde_core::EntropyError) -> Self {
        use qde_core::EntropyError as E;
        match e {
            E::CapExceeded { .. } | E::MemoryBudget { .. } => CliError::Resource(e.to_string()),
            E::Partition(p) => p.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<qde_core::PartitionError> for CliError {
    fn from(e: qde_core::PartitionError) -> Self {
        use qde_core::PartitionError as P;
        match e {
            P::Io(io) => CliError::Io(io.to_string()),
            P::NotDivisible { .. } | P::DimensionMismatch { .. } | P::Malformed { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<qde_core::TorusError> for CliError {
    fn from(e: qde_core::TorusError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<qde_core::MatError> for CliError {
    fn from(e: qde_core::MatError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
