use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A bitstring, state or constraint does not match the problem size.
    Dimension { expected: usize, found: usize },
    /// A variable index is outside `0..n`.
    Index { index: usize, n: usize },
    /// An argument is outside its admissible range.
    Parameter(String),
    /// The problem is too large for exhaustive enumeration or simulation.
    Capacity { n: usize, max: usize },
    /// A penalty scheme or configuration is inconsistent with the constraints.
    Configuration(String),
    /// Stored data breaks a type invariant.
    Validation(String),
    /// The time-evolution accuracy contract could not be met.
    NonConvergence { steps: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Index { index, n } => write!(f, "variable index {index} out of range for n = {n}"),
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Capacity { n, max } => write!(f, "problem size {n} exceeds the limit of {max}"),
            Error::Configuration(msg) => write!(f, "configuration error: {msg}"),
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::NonConvergence { steps } => {
                write!(f, "time evolution did not converge within {steps} steps")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
