use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input outside kernel domain: {0}")]
    Domain(String),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix not positive definite at pivot {pivot}{}", .block.map(|b| format!(" (block {b})")).unwrap_or_default())]
    NotPositiveDefinite { pivot: usize, block: Option<usize> },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("trial failed at N={n}, m={m}, trial={trial}: {source}")]
    Trial {
        n: usize,
        m: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Whether the error comes from a linear-algebra failure rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. } | Error::Singular(_) => true,
            Error::Trial { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// Attach the block index to a factorization failure.
    pub(crate) fn in_block(self, index: usize) -> Self {
        match self {
            Error::NotPositiveDefinite { pivot, .. } => Error::NotPositiveDefinite {
                pivot,
                block: Some(index),
            },
            other => other,
        }
    }
}
