use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),

    #[error("the point at infinity is not allowed here")]
    InfinitePoint,

    #[error("non-finite coordinate in point")]
    NonFiniteCoordinate,

    #[error("empty point set")]
    EmptySet,

    #[error("invalid annulus: need 0 < r1 < r2 < inf, got r1={r1}, r2={r2}")]
    InvalidAnnulus { r1: f64, r2: f64 },

    #[error("invalid polyline: {0}")]
    InvalidPolyline(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point sets E and F intersect")]
    SetsIntersect,

    #[error("curve {curve} vertex {vertex} lies outside the domain of mapping `{mapping}`")]
    OutsideDomain {
        mapping: String,
        curve: usize,
        vertex: usize,
    },

    #[error("point outside the domain of mapping `{0}`")]
    PointOutsideDomain(String),

    #[error("curve {curve} leaves the grid")]
    CurveExitsGrid { curve: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("integral diverges")]
    Divergent,

    #[error("test density is not admissible (integral {0} < 1)")]
    NotAdmissible(f64),

    #[error("density is not admissible for curve {curve} (line integral {integral})")]
    DensityNotAdmissible { curve: usize, integral: f64 },

    #[error("unknown mapping `{0}`")]
    UnknownMapping(String),
}
