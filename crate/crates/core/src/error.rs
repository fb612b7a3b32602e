use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a mesh needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("triangle {0} references a vertex index out of range")]
    VertexOutOfRange(usize),
    #[error("triangle {0} is degenerate (zero area)")]
    DegenerateTriangle(usize),
    #[error("triangle {0} is listed clockwise")]
    InvertedTriangle(usize),
    #[error("triangle {0} duplicates triangle {1}")]
    DuplicateTriangle(usize, usize),
    #[error("non-conforming mesh at triangle {element}: {reason}")]
    NonConforming { element: usize, reason: String },
    #[error("triangle {0} has an invalid refinement edge")]
    InvalidRefinementEdge(usize),
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("element id {0} is out of range")]
    InvalidElement(usize),
    #[error("meshes are not nested")]
    NotNested,
    #[error("refinement depth limit of {0} bisections exceeded")]
    DepthLimit(usize),
    #[error("degree {0} is not valid here")]
    InvalidDegree(usize),
    #[error("field kind does not match form degree {0}")]
    FieldMismatch(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("function lives on a different mesh than the complex")]
    MeshMismatch,
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
