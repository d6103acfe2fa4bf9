use thiserror::Error;

/// Reasons a [`ProbabilityMeasure`](crate::ProbabilityMeasure) is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("measure has empty support")]
    EmptySupport,
    #[error("element {0} does not belong to the group")]
    ForeignElement(String),
    #[error("identity carries mass; support must avoid e")]
    IdentityInSupport,
    #[error("support element {0} is not a generator or generator inverse")]
    NonGeneratorSupport(String),
    #[error("support element {0} listed twice")]
    DuplicateElement(String),
    #[error("weight {weight} of {element} is outside (0, 1]")]
    WeightOutOfRange { element: String, weight: String },
    #[error("weights sum to {0}, not 1")]
    NotNormalized(String),
    #[error("measure is not symmetric: mu({element}) != mu({inverse})")]
    NotSymmetric { element: String, inverse: String },
    #[error("support does not generate G: generator {0} unreachable")]
    NotGenerating(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("capacity exceeded: {what} needs {needed} nodes, budget is {budget}")]
    Capacity {
        what: String,
        needed: String,
        budget: usize,
    },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("solver stopped after {iterations} iterations with relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
