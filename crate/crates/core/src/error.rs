use thiserror::Error;

use crate::lattice::Vertex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),

    #[error("lattice animal enumeration limited to size {limit}, requested {requested}")]
    EnumerationLimit { requested: usize, limit: usize },

    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("lambdas must be strictly increasing and positive")]
    UnsortedLambdas,

    #[error("list must be non-empty and strictly increasing: {0}")]
    UnsortedList(&'static str),

    #[error("alpha {alpha} outside (0, 1/(d-1)) for d = {dim}")]
    AlphaOutOfRange { alpha: f64, dim: usize },

    #[error("epsilon {epsilon} does not divide the time horizon {horizon}")]
    NonDivisibleEpsilon { epsilon: f64, horizon: f64 },

    #[error("window too small: missing {vertex:?} or time floor above {needed_floor}")]
    WindowTooSmall { vertex: Vertex, needed_floor: f64 },

    #[error("malformed space-time endpoints: {0}")]
    MalformedEndpoints(String),

    #[error("vertex {0:?} is outside the exploration region")]
    OutsideRegion(Vertex),

    #[error("k = {k} outside 1..={n}")]
    KOutOfRange { k: u32, n: u32 },

    #[error("block {0} is not part of the partition")]
    UnknownBlock(String),

    #[error("step h = {h} too large for lambda = {lambda}")]
    StepTooLarge { h: f64, lambda: f64 },

    #[error("reference radius {reference} smaller than tested radius {tested}")]
    ReferenceTooSmall { reference: f64, tested: f64 },

    #[error("block side N must be an even positive integer, got {0}")]
    OddBlockSide(u32),

    #[error("block centres too close: distance {distance} < {required}")]
    SeparationViolated { distance: u64, required: u64 },

    #[error("invalid parameter {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable kebab-case identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::BadDimension(_) => "bad-dimension",
            Error::EnumerationLimit { .. } => "enumeration-limit",
            Error::NonPositiveLambda(_) => "non-positive-lambda",
            Error::UnsortedLambdas => "unsorted-lambdas",
            Error::UnsortedList(_) => "unsorted-list",
            Error::AlphaOutOfRange { .. } => "alpha-out-of-range",
            Error::NonDivisibleEpsilon { .. } => "non-divisible-epsilon",
            Error::WindowTooSmall { .. } => "window-too-small",
            Error::MalformedEndpoints(_) => "malformed-endpoints",
            Error::OutsideRegion(_) => "outside-region",
            Error::KOutOfRange { .. } => "k-out-of-range",
            Error::UnknownBlock(_) => "unknown-block",
            Error::StepTooLarge { .. } => "step-too-large",
            Error::ReferenceTooSmall { .. } => "reference-too-small",
            Error::OddBlockSide(_) => "odd-block-side",
            Error::SeparationViolated { .. } => "separation-violated",
            Error::Invalid { .. } => "invalid",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
