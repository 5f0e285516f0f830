use thiserror::Error;

/// Errors raised by the evaluators, samplers and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The count law did not reach the requested coverage before the support cap.
    #[error("heavy-tailed count: cumulative mass {covered:.3e} short of coverage at support cap {cap}")]
    HeavyTail { cap: usize, covered: f64 },

    #[error("no sampler available for {0}")]
    UnsupportedSampler(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
