use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Evaluation outside the domain of a formula (e.g. a singular PSD).
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation requires a finite integrated strength but the model has none.
    #[error("{0}")]
    Divergent(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Arrays that must share a lattice or tensor shape do not.
    #[error("shape error: {0}")]
    Shape(String),

    /// Invalid run parameters, including violated stability guards.
    #[error("configuration error: {0}")]
    Config(String),

    /// Internal consistency check failed (e.g. lost Hermitian symmetry).
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("linear algebra error: {0}")]
    Linalg(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
