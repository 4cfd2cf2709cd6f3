use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value encountered: {0}")]
    Numerical(String),
    #[error("index out of resolved range: {0}")]
    Range(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("index mismatch: {0}")]
    Index(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("sequence does not converge: {0}")]
    Convergence(String),
    #[error("viscosity not elliptic: {0}")]
    Ellipticity(String),
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("vacuum approached: {0}")]
    Vacuum(String),
    #[error("flow map is not a diffeomorphism: {0}")]
    Diffeo(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
