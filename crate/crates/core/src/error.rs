use thiserror::Error;

/// Errors produced by every module of the crate.
///
/// The variants are grouped so that a front end can map them onto a small
/// set of exit statuses: validation problems, resource caps, and violated
/// theorem-guaranteed identities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("generator x{index} exceeds rank {rank}")]
    Rank { index: usize, rank: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("no convergence after {iterations} iterations (best estimate {best})")]
    NonConvergence { iterations: usize, best: f64 },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn violation(msg: impl Into<String>) -> Self {
        Error::TheoremViolation(msg.into())
    }

    /// True for failures of identities or inequalities that hold by theorem.
    pub fn is_violation(&self) -> bool {
        matches!(self, Error::TheoremViolation(_) | Error::StructureViolation(_))
    }

    /// True for resource-cap and size-limit failures.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::Unsupported(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
