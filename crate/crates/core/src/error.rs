use thiserror::Error;

/// Errors raised by the library. Every variant maps to a stable string code
/// (see [`Error::code`]) that the CLI surfaces in its JSON error objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("point {x} lies outside [0, 1]")]
    OutOfDomain { x: f64 },
    #[error("basis index {0} is not part of this model")]
    UnknownIndex(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("sample value {value} at position {index} lies outside [0, 1]")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("invalid p = {p} for n = {n}: need 1 <= p <= n - 1")]
    InvalidP { n: usize, p: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("C({n}, {p}) exceeds the enumeration cap {cap}; use the closed form")]
    EnumerationCap { n: usize, p: usize, cap: u128 },
    #[error("binomial coefficient overflows 128 bits")]
    Overflow,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("configuration too large: {0}")]
    TooLarge(String),
    #[error("missing moments: {0}")]
    MissingMoments(String),
    #[error("invalid collection: {0}")]
    InvalidCollection(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::UnknownIndex(_) => "unknown_index",
            Error::EmptySample => "empty_sample",
            Error::SampleOutOfRange { .. } => "sample_out_of_range",
            Error::InvalidP { .. } => "invalid_p",
            Error::TooFewObservations { .. } => "too_few_observations",
            Error::EnumerationCap { .. } => "enumeration_cap",
            Error::Overflow => "overflow",
            Error::InvalidSplit(_) => "invalid_split",
            Error::InvalidDensity(_) => "invalid_density",
            Error::TooLarge(_) => "too_large",
            Error::MissingMoments(_) => "missing_moments",
            Error::InvalidCollection(_) => "invalid_collection",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
