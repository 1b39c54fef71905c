use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampling failed for point {point}: no root found after {attempts} slices")]
    SamplingFailure { point: usize, attempts: usize },

    #[error("anchor selection failed after {retries} retries: rank {achieved} < {required}")]
    AnchorSelection {
        retries: usize,
        achieved: usize,
        required: usize,
    },

    #[error(
        "kernel matrix numerically rank deficient: rank {rank} < {required} at cutoff {cutoff:e}"
    )]
    IllConditionedKernel {
        rank: usize,
        required: usize,
        cutoff: f64,
    },

    #[error("malformed input at {location}: {message}")]
    Format { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::format(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let location = match e.position() {
            Some(pos) => format!("line {}", pos.line()),
            None => "csv".to_string(),
        };
        Error::format(location, e.to_string())
    }
}
