use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "STL payload truncated: header declares {declared} triangles ({expected} bytes) but file has {actual} bytes"
    )]
    StlTruncated {
        declared: u32,
        expected: usize,
        actual: usize,
    },
    #[error("STL syntax error on line {line}: {message}")]
    StlSyntax { line: usize, message: String },
    #[error("STL contains no usable triangles")]
    StlEmpty,

    #[error("inside test gave up after {0} ray retries (pathological geometry near the query point)")]
    RayRetryExhausted(usize),
    #[error("projection direction undefined: point coincides with the ball center")]
    ProjectionUndefined,
    #[error("node generation produced no points (spacing {0} too large for the domain)")]
    EmptyNodeSet(f64),

    #[error("node {node} has only {found} neighbors, at least {needed} required")]
    TooFewNeighbors { node: usize, found: usize, needed: usize },
    #[error("node {0} is not a vertex of the tetrahedral mesh")]
    NotInMesh(usize),

    #[error("weights could not be computed for node {node}: {reason}")]
    WeightsFailed { node: usize, reason: String },
    #[error("system matrix is singular to working precision")]
    Singular,
    #[error("zero pivot in row {0} of the incomplete factorization")]
    ZeroPivot(usize),

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
