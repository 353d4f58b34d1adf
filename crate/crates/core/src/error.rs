use alloc::string::String;

/// Errors produced by the solver, classifier, and evaluation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violated a precondition (dimension, finiteness, range).
    InvalidInput(String),
    /// A projected point had zero depth.
    ProjectionSingularity { index: usize },
    /// Too few landmarks for the linear pose initialization.
    InsufficientPoints { needed: usize, got: usize },
    /// Non-finite values appeared during iterative refinement.
    NumericalFailure(String),
    /// Training data contained a single class.
    DegenerateTraining,
    /// The model is missing fitted probability parameters.
    ModelIncomplete,
    /// A metric is undefined for the given input.
    UndefinedMetric(&'static str),
    /// The requested dataset split cannot be constructed.
    SplitInfeasible(String),
    /// A scene specification is internally inconsistent or unsatisfiable.
    SpecInvalid(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ProjectionSingularity { index } => {
                write!(f, "projection singularity: landmark {index} has zero depth")
            }
            Error::InsufficientPoints { needed, got } => {
                write!(f, "insufficient points: need at least {needed}, got {got}")
            }
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
            Error::DegenerateTraining => {
                write!(f, "degenerate training: both classes must be present")
            }
            Error::ModelIncomplete => {
                write!(f, "model incomplete: probability parameters not fitted")
            }
            Error::UndefinedMetric(what) => write!(f, "undefined metric: {what}"),
            Error::SplitInfeasible(msg) => write!(f, "split infeasible: {msg}"),
            Error::SpecInvalid(msg) => write!(f, "invalid scene spec: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
