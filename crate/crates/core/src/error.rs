use thiserror::Error;

use crate::field::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed mesh document at line {line}: {msg}")]
    MalformedMesh { line: usize, msg: String },
    #[error("triangle {triangle}: vertex index {index} out of range")]
    IndexOutOfRange { triangle: usize, index: usize },
    #[error("triangle {triangle} is degenerate")]
    DegenerateTriangle { triangle: usize },
    #[error("triangle {triangle} is inverted (negative orientation)")]
    InvertedTriangle { triangle: usize },
    #[error("triangle {triangle}: edge ({a}, {b}) is shared by three or more triangles")]
    NonManifoldEdge { triangle: usize, a: usize, b: usize },
    #[error("triangle {triangle}: edge ({a}, {b}) is traversed twice in the same direction")]
    InconsistentOrientation { triangle: usize, a: usize, b: usize },
    #[error("metric tensor at vertex {vertex} is not positive definite")]
    MetricNotPositive { vertex: usize },
    #[error("triangle adjacency graph is not connected (triangle {triangle} unreachable)")]
    Disconnected { triangle: usize },
    #[error("mesh has an empty boundary")]
    EmptyBoundary,
    #[error("boundary is not a union of simple loops at vertex {vertex}")]
    NonSimpleBoundary { vertex: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expression for `{field}`: {source}")]
    Field {
        field: String,
        #[source]
        source: ExprError,
    },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("coefficient a is not symmetric at ({x}, {y}): a12 = {a12}, a21 = {a21}")]
    AsymmetricCoefficient { x: f64, y: f64, a12: f64, a21: f64 },
    #[error("beta must be strictly positive, got {value} at boundary vertex {vertex}")]
    NonPositiveBeta { vertex: usize, value: f64 },
    #[error("ellipticity violated at {location}: eigenvalue {eigenvalue:e} of a g^-1 is not positive")]
    Ellipticity { location: String, eigenvalue: f64 },
    #[error("triangle {triangle} has area {area:e} under the transformed metric")]
    DegenerateElement { triangle: usize, area: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular matrix: pivot {pivot} has magnitude {magnitude:e}")]
    Singular { pivot: usize, magnitude: f64 },
    #[error("interior Dirichlet block is singular: lambda = 0 lies in the Dirichlet spectrum (pivot {pivot})")]
    DirichletSpectrum { pivot: usize },
    #[error("lambda = {lambda} is too close to the spectrum (distance estimate {distance:e})")]
    NearSpectrum { lambda: String, distance: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
