use thiserror::Error;

/// Errors raised by frame construction, transforms and scattering.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("array is in the {found} domain, expected the {expected} domain")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("atom {0} has an empty mask on this lattice")]
    EmptyMask(String),

    #[error("exact rotation unsupported: {0}")]
    RotationUnsupported(String),

    #[error("resource cap exceeded: {requested} maps requested, cap is {cap}")]
    CapExceeded { requested: u128, cap: u64 },

    #[error("layout mismatch between feature sets: {0}")]
    LayoutMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
