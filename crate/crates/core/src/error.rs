use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied index, shape or option is outside its valid range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The model intensity is nonpositive where the likelihood needs it positive.
    #[error("infeasible parameters: intensity {intensity} at t={t}, node={node}")]
    Infeasible { t: i64, node: usize, intensity: f64 },

    /// A numeric routine produced or met a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The baseline stationarity equation has no root (no events in the batch).
    #[error("no root: {0}")]
    NoRoot(String),

    /// The baseline stationarity equation stays positive on the whole bracket.
    #[error("unbounded root: {0}")]
    Unbounded(String),

    /// The simulator met a nonpositive intensity.
    #[error("generation failed at t={t}, node={node}: intensity {intensity} after {events_so_far} events")]
    Generation { t: i64, node: usize, intensity: f64, events_so_far: usize },

    /// A classification metric is undefined for the given labels.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Malformed file or configuration contents.
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
