use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("covariance of user {user} is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { user: usize, min_eig: f64 },

    #[error("invalid Lagrange multiplier {0}: must be strictly positive")]
    InvalidMultiplier(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("cyclic covariance updates did not converge within {cycles} cycles (last change {last_change:e})")]
    NoConvergence { cycles: usize, last_change: f64 },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("config: {0}")]
    Config(String),

    #[error("instance file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
