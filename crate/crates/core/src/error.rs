use thiserror::Error;

use crate::mesh::{EdgeTag, Region};

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("no boundary edges tagged {0:?}")]
    UnknownTag(EdgeTag),

    #[error("region {0:?} has no triangles")]
    EmptyRegion(Region),

    #[error("invalid coefficient: {0}")]
    Coefficient(String),

    #[error("node {node} constrained twice with conflicting values {first} and {second}")]
    ConflictingDirichlet { node: usize, first: f64, second: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("non-finite value in linear system: {0}")]
    NonFinite(String),

    #[error("linear solver did not converge: {iterations} iterations, relative residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("curve fit failed: {0}")]
    FitFailure(String),

    #[error(transparent)]
    Config(#[from] crate::io::config::ConfigError),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
