//! Error type shared by every module.
//!
//! Variant names are part of the CLI contract: a domain error exits with
//! code 1 and prints `<Kind>: <message>` on stderr, where `<Kind>` is the
//! string returned by [`SglError::kind`].

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SglError>;

#[derive(Debug, Error)]
pub enum SglError {
    #[error("part `{0}` has no elements")]
    EmptyPart(String),

    #[error("element `{element}` appears in both part `{first}` and part `{second}`")]
    OverlappingParts {
        element: String,
        first: String,
        second: String,
    },

    #[error("name `{0}` is declared more than once")]
    DuplicateName(String),

    #[error("invalid name `{name}`: {reason}")]
    InvalidName { name: String, reason: &'static str },

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("unknown part `{0}`")]
    UnknownPart(String),

    #[error("set {{{0}}} is not a base of the partition matroid")]
    NotABase(String),

    #[error("{what} needs {size} {unit}, which exceeds the cap of {cap}")]
    TooLarge {
        what: &'static str,
        unit: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SglError {
    /// Stable variant name, printed by the CLI in front of domain errors.
    pub fn kind(&self) -> &'static str {
        match self {
            SglError::EmptyPart(_) => "EmptyPart",
            SglError::OverlappingParts { .. } => "OverlappingParts",
            SglError::DuplicateName(_) => "DuplicateName",
            SglError::InvalidName { .. } => "InvalidName",
            SglError::UnknownElement(_) => "UnknownElement",
            SglError::UnknownPart(_) => "UnknownPart",
            SglError::NotABase(_) => "NotABase",
            SglError::TooLarge { .. } => "TooLarge",
            SglError::OutOfRange { .. } => "OutOfRange",
            SglError::InvalidOrder(_) => "InvalidOrder",
            SglError::Parse { .. } => "ParseError",
            SglError::InvariantViolation(_) => "InvariantViolation",
            SglError::Unsupported(_) => "Unsupported",
            SglError::Io(_) => "IoError",
        }
    }
}
