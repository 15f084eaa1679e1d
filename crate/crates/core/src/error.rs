use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (bad point, negative radius, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Some degree `d(x)` vanished where a strictly positive degree is required.
    #[error("degenerate degree: {0}")]
    DegenerateDegree(String),

    /// A spectral window has an eigenvalue too close to its boundary, or reaches into
    /// the essential spectrum.
    #[error("ill-posed spectral window: {0}")]
    IllPosedWindow(String),

    /// A requested eigenvalue belongs to the essential spectrum of the operator.
    #[error("essential spectrum: {0}")]
    EssentialSpectrum(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateDegree(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
