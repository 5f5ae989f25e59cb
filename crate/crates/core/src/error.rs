use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("norm is not rotund: {0}")]
    NotRotund(String),

    #[error("second derivative unavailable: {0}")]
    NotSmooth(String),

    #[error("gauge is not Dini")]
    NotDini,

    #[error("invalid gauge: {0}")]
    InvalidGauge(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("point is not on the network (distance {0:e})")]
    NotOnNetwork(f64),

    #[error("operands use different norms or dimensions")]
    NormMismatch,

    #[error("point lies outside the open domain (boundary distance {0:e})")]
    OutsideDomain(f64),

    #[error("weight is unbounded on the region")]
    UnboundedWeight,

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ball trace has {0} points, expected 2")]
    TraceCount(usize),

    #[error("degenerate geodesic: {0}")]
    DegenerateGeodesic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_domain(name: &'static str, value: f64, range: impl Into<String>) -> Error {
    Error::OutOfDomain {
        name,
        value,
        range: range.into(),
    }
}
