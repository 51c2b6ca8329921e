use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An RRH sits at (or inside the exclusion radius of) the UE position.
    #[error("singular geometry: RRH {index} is at distance {distance} from the UE")]
    SingularGeometry { index: usize, distance: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
