use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by mesh construction, analysis and I/O.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} is degenerate (repeated vertex index)")]
    DegenerateFace { face: usize },
    #[error("edge ({v0}, {v1}) has {count} incident faces; only manifold meshes are supported")]
    NonManifoldEdge { v0: usize, v1: usize, count: usize },
    #[error("face {face} has zero area")]
    ZeroAreaFace { face: usize },
    #[error("edge {edge} is a boundary edge and has no flap")]
    BoundaryEdge { edge: usize },
    #[error("degenerate flap on edge {edge:?}: triangle area below {min_area:e}")]
    DegenerateFlap { edge: Option<usize>, min_area: f64 },
    #[error("mesh is empty")]
    EmptyMesh,
    #[error("label count {labels} does not match face count {faces}")]
    LabelLengthMismatch { labels: usize, faces: usize },
    #[error(
        "connectivity mismatch: result has {result_vertices} vertices / {result_faces} faces, \
         truth has {truth_vertices} vertices / {truth_faces} faces"
    )]
    ConnectivityMismatch {
        result_vertices: usize,
        result_faces: usize,
        truth_vertices: usize,
        truth_faces: usize,
    },
    #[error("conjugate gradient stopped at relative residual {residual:e} after {iterations} iterations (target {tol:e})")]
    SolverDiverged {
        residual: f64,
        iterations: usize,
        tol: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: face has {count} vertices; only triangles are supported")]
    NonTriangleFace {
        path: PathBuf,
        line: usize,
        count: usize,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type MeshResult<T> = Result<T, MeshError>;

impl MeshError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MeshError::Io {
            path: path.into(),
            source,
        }
    }
}
