use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the orientation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("facet {facet} is degenerate: {reason}")]
    DegenerateFacet { facet: usize, reason: String },

    #[error("mesh has no vertices")]
    EmptyMesh,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("patch containing facet {facet} is not orientable")]
    NonOrientablePatch { facet: usize },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("evaluation point is within {distance:e} of the boundary of facet {facet}")]
    SingularEvaluation { facet: usize, distance: f64 },

    #[error("quadrature for facets ({tau}, {mu}) neither converged nor diverged after {levels} levels (last relative change {last_change:e})")]
    NoConvergence {
        tau: usize,
        mu: usize,
        levels: usize,
        last_change: f64,
    },

    #[error("entry Q[{i}][{j}] has both +inf and -inf contributions")]
    ConflictingDivergence { i: usize, j: usize },

    #[error("boundaries of patches {i} and {j} coincide; the interaction is infinite")]
    CoincidentBoundaries { i: usize, j: usize },

    #[error("{n} patches exceed the brute-force limit of {limit}; use local search")]
    TooManyPatches { n: usize, limit: usize },

    #[error("clamp range [{min}, {max}] is empty")]
    BadClampRange { min: f64, max: f64 },

    #[error("point {index} is closer than {min_distance:e} to the surface")]
    TooCloseToSurface { index: usize, min_distance: f64 },

    #[error("invalid sign {0}; signs must be -1 or +1")]
    InvalidSign(i64),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
