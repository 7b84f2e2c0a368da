//! Error classes and their exit codes.

use std::fmt;

use spherestab::Error;

/// Malformed input: config, function spec, graph file, out-of-range values.
pub const EXIT_DATA: u8 = 65;
/// A computation failed (non-finite value, quadrature breakdown, divergence).
pub const EXIT_EVALUATION: u8 = 70;
/// Files could not be read or written.
pub const EXIT_IO: u8 = 74;

#[derive(Debug)]
pub enum Failure {
    Data(anyhow::Error),
    Evaluation(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Self::Data(_) => EXIT_DATA,
            Self::Evaluation(_) => EXIT_EVALUATION,
            Self::Io(_) => EXIT_IO,
        }
    }

    pub fn context(self, what: String) -> Self {
        match self {
            Self::Data(e) => Self::Data(e.context(what)),
            Self::Evaluation(e) => Self::Evaluation(e.context(what)),
            Self::Io(e) => Self::Io(e.context(what)),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            Self::Data(e) => ("invalid input", e),
            Self::Evaluation(e) => ("evaluation failed", e),
            Self::Io(e) => ("i/o error", e),
        };
        write!(f, "{kind}: {e:#}")
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::SizeLimit { .. } | Error::Invalid(_) | Error::Parse { .. } => {
                Self::Data(e.into())
            }
            Error::Divergence { ref state, .. } => {
                let state = state.clone();
                Self::Evaluation(anyhow::Error::from(e).context(format!("state at divergence: {state}")))
            }
            _ => Self::Evaluation(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.into())
    }
}
