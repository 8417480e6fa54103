use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("search frontier exhausted without reaching a goal")]
    Unsolvable,

    #[error("search exceeded the expansion cap of {cap} states")]
    ResourceLimit { cap: usize },

    #[error("instance size {n} exceeds the solver limit of {cap}")]
    SizeLimit { n: usize, cap: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("loss {0} has no usable gradient")]
    NondifferentiableLoss(&'static str),

    #[error("empty input")]
    EmptyInput,

    #[error("label {label} is not on the class grid (step {step}, {classes} classes)")]
    LabelOffGrid { label: f64, step: f64, classes: usize },

    #[error("zero label reached the scaled loss")]
    ZeroLabel,

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("no architecture up to size {cap} fits the dataset")]
    NoFit { cap: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
