use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight exponent A[{index}] = {value} is negative")]
    NegativeExponent { index: usize, value: f64 },

    #[error("dimension {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("invalid box: lower[{index}] = {lower} must be < upper[{index}] = {upper}")]
    InvalidBox {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("non-finite sample {value} at cell centered at {center:?}")]
    NonFiniteSample { value: f64, center: Vec<f64> },

    #[error("truncation levels must satisfy 0 < t1 < t2, got t1 = {t1}, t2 = {t2}")]
    BadTruncationLevels { t1: f64, t2: f64 },

    #[error("dilation index estimate needs at least 3 probes, got {0}")]
    TooFewProbes(usize),

    #[error("effective exponent {p_bar} >= homogeneous dimension {d}: critical exponent undefined")]
    SupercriticalExponent { p_bar: f64, d: f64 },

    #[error("exponent vector length {got} does not match dimension {expected}")]
    ExponentLength { got: usize, expected: usize },

    #[error("case {case} hypothesis not met: {reason}")]
    HypothesisNotMet { case: String, reason: String },

    #[error("gradient component {0} has zero mass: balancing is degenerate")]
    DegenerateGradient(usize),

    #[error("family parameter out of range: {0}")]
    BadFamilyParameter(String),

    #[error("unknown case id `{got}`; valid ids: {valid}")]
    UnknownCase { got: String, valid: String },

    #[error("cannot parse space spec `{input}`: {reason}")]
    BadSpaceSpec { input: String, reason: String },
}
