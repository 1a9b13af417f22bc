use std::fmt;
use std::path::Path;

use pamm_core::PammError;

/// Anything that ends a command unsuccessfully, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Usage(String),
    Engine(PammError),
    Violation(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }

    /// 1 I/O, 2 invalid input, 3 insufficient supply, 4 bad thresholds,
    /// 5 property violation, 6 other computation errors.
    pub fn code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Usage(_) => 2,
            Self::Violation(_) => 5,
            Self::Engine(e) => match e {
                PammError::InsufficientSupply { .. } => 3,
                PammError::ThresholdMismatch(_) => 4,
                PammError::Parse(_)
                | PammError::InvalidParams(_)
                | PammError::InvalidState(_)
                | PammError::EmptySystem
                | PammError::NegativeAmount(_)
                | PammError::OutOfRange { .. } => 2,
                _ => 6,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(m) | Self::Usage(m) | Self::Violation(m) => f.write_str(m),
            Self::Engine(e) => e.fmt(f),
        }
    }
}

impl From<PammError> for Failure {
    fn from(e: PammError) -> Self {
        Self::Engine(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
