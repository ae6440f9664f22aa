use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input parameter is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix has the wrong shape or violates a structural invariant.
    #[error("shape error: {0}")]
    Shape(String),

    /// A covariance matrix has a symplectic eigenvalue below 1 beyond tolerance.
    #[error("unphysical state: {0}")]
    Unphysical(String),

    /// Homodyne conditioning on a quadrature with non-positive variance.
    #[error("degenerate measurement: {0}")]
    DegenerateMeasurement(String),

    /// An analytic shortcut was called outside its validity region.
    #[error("method misuse: {0}")]
    MethodMisuse(String),

    /// The requested protocol configuration is not supported.
    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),

    /// An internal numerical consistency check failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
