use thiserror::Error;

use crate::state::Dof;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label {0:?} appears in both operands")]
    DuplicateLabel(Dof),
    #[error("label {0:?} is not present in the state")]
    UnknownLabel(Dof),
    #[error("cannot trace out every label")]
    EmptyRemainder,
    #[error("label sets do not match: expected {expected:?}, found {found:?}")]
    LabelMismatch { expected: Vec<Dof>, found: Vec<Dof> },
    #[error("target state is not pure (purity {0})")]
    NonPureTarget(f64),
    #[error("state is not normalized (trace {0})")]
    NotNormalized(f64),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pulse events are not sorted by time")]
    UnsortedSequence,
    #[error("stage `{name}` has efficiency {value}, expected a value in (0, 1]")]
    InvalidEfficiency { name: String, value: f64 },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with `InvalidParameter` unless `value` is a probability.
pub(crate) fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {value} must lie in [0, 1]")))
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {value} must be positive")))
    }
}
