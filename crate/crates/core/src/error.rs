use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::EnsembleState;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: shape mismatch, index out of range, violated precondition.
    Input(String),
    /// A parameter lies outside the domain where a formula is defined.
    Domain(String),
    /// The step-size controller gave up.
    Integration {
        message: String,
        last_good: Box<EnsembleState>,
    },
    /// An iterative solver failed to reach its target; `trace` holds the iterates.
    Solver { message: String, trace: Vec<f64> },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Input(msg) => write!(f, "input error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Integration { message, last_good } => write!(
                f,
                "integration error at t = {}: {message}",
                last_good.time
            ),
            Error::Solver { message, trace } => {
                write!(f, "solver error after {} iterates: {message}", trace.len())
            }
        }
    }
}

impl core::error::Error for Error {}
