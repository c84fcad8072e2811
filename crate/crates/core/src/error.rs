use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("propagation failed: {0}")]
    Propagation(String),

    #[error("fit failed: {0}")]
    FitDomain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidSpec(_)
            | Error::InvalidArgument(_)
            | Error::InvalidBipartition(_)
            | Error::Dimension(_) => 2,
            Error::Numeric(_)
            | Error::Propagation(_)
            | Error::FitDomain(_)
            | Error::SymmetryViolation(_) => 3,
            Error::Resource(_) => 4,
            Error::Io(_) => 1,
        }
    }
}
