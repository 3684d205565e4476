use thiserror::Error;

/// Failures raised by the statistics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("source labels length {labels} does not match sample length {values}")]
    LabelMismatch { values: usize, labels: usize },

    #[error("insufficient data: need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("{name} out of domain: {value}")]
    Domain { name: &'static str, value: f64 },

    #[error("degenerate scale: interquartile range is zero")]
    DegenerateScale,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T: num_traits::ToPrimitive>(name: &'static str, value: T) -> Error {
    Error::Domain {
        name,
        value: value.to_f64().unwrap_or(f64::NAN),
    }
}
