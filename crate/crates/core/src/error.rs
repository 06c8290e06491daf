use thiserror::Error;

pub type Result<T, E = VemError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {element}: {reason}")]
    DegenerateElement { element: usize, reason: String },

    #[error("interface mismatch: node at ({x}, {y}) is {distance:.3e} away from the other interface (tol {tol:.3e})")]
    GeometricMismatch { x: f64, y: f64, distance: f64, tol: f64 },

    #[error("invalid merge: {0}")]
    InvalidMerge(String),

    #[error("mesh generation failed: {0}")]
    MeshGeneration(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("incompressible material (poisson = 0.5) is not supported")]
    IncompressibleUnsupported,

    #[error("element {element}: gradient projection is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { element: usize, condition: f64 },

    #[error("element {element}: insufficient projection order l = {order} for {vertices} vertices (stiffness rank {rank}, expected {expected})")]
    InsufficientOrder { element: usize, order: usize, vertices: usize, rank: usize, expected: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("boundary condition error: {0}")]
    BoundaryCondition(String),

    #[error("conflicting Dirichlet values on dof {dof}: {first} vs {second}")]
    ConflictingConstraint { dof: usize, first: f64, second: f64 },

    #[error("solver error: {message} (relative residual {residual:.3e})")]
    Solver { message: String, residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("field and mesh do not match: {0}")]
    MeshMismatch(String),

    #[error("point ({x}, {y}) is outside the mesh")]
    PointOutsideMesh { x: f64, y: f64 },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("radius {r} is outside the annulus [{r_inner}, {r_outer}]")]
    OutsideAnnulus { r: f64, r_inner: f64, r_outer: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{}: {source}", path.display())]
    File { path: std::path::PathBuf, source: std::io::Error },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl VemError {
    /// Fills in the element index of kernel errors raised without one.
    pub fn with_element(self, index: usize) -> Self {
        match self {
            VemError::DegenerateElement { reason, .. } => VemError::DegenerateElement { element: index, reason },
            VemError::IllConditioned { condition, .. } => VemError::IllConditioned { element: index, condition },
            VemError::InsufficientOrder { order, vertices, rank, expected, .. } => {
                VemError::InsufficientOrder { element: index, order, vertices, rank, expected }
            }
            other => other,
        }
    }
}

/// Reads a whole file, naming the path on failure.
pub fn read_text(path: impl AsRef<std::path::Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|source| VemError::File { path: path.to_path_buf(), source })
}
