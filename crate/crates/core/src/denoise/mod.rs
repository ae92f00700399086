//! Two-step denoising: filter face normals, then move vertices to match.
//!
//! Four normal filters are provided (unilateral, bilateral, guided and
//! L1-median). Each accepts optional [`ClusterLabels`]; when present, every
//! neighbourhood is intersected with the face's own cluster so filtering
//! never averages across a segmented feature.
//!
//! Sweeps are Jacobi style: each reads the previous sweep's normals and
//! neighbour lists are sorted, so results do not depend on thread count.

mod filters;
mod median;
mod vertex;

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

pub use filters::{filter_bnf, filter_gnf, filter_l1median, filter_normals, filter_unf};
pub use median::{weighted_geometric_median, WEISZFELD_EPS};
pub use vertex::vertex_update;

use crate::error::{MeshError, MeshResult};
use crate::mesh::{CentroidIndex, FaceGeometry, Topology, TriMesh};
use crate::segment::{segment, ClusterLabels, SegmentParams};

/// Per-face unit normals.
pub type NormalField = Vec<Vector3<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Unf,
    Bnf,
    Gnf,
    L1Median,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Unf => "unf",
            Method::Bnf => "bnf",
            Method::Gnf => "gnf",
            Method::L1Median => "l1",
        }
    }

    /// Number of entries in the parameter tuple.
    pub fn arity(self) -> usize {
        match self {
            Method::Gnf => 5,
            _ => 3,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unf" => Ok(Method::Unf),
            "bnf" => Ok(Method::Bnf),
            "gnf" => Ok(Method::Gnf),
            "l1" | "l1median" | "l1-median" => Ok(Method::L1Median),
            other => Err(MeshError::InvalidParameter(format!(
                "unknown method {other:?} (expected unf|bnf|gnf|l1)"
            ))),
        }
    }
}

/// Backend parameters. Tuple order (see [`DenoiseParams::from_tuple`]):
///
/// | method | tuple |
/// |--------|-------|
/// | UNF | `(T, n_iter, v_iter)` |
/// | BNF | `(sigma_r, n_iter, v_iter)` |
/// | GNF | `(r, sigma_s_mult, sigma_r, n_iter, v_iter)` |
/// | L1  | `(angle_max_deg, n_iter, v_iter)` |
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenoiseParams {
    Unf {
        /// Dot-product threshold below which neighbours get zero weight.
        threshold: f64,
        n_iter: usize,
        v_iter: usize,
    },
    Bnf {
        sigma_r: f64,
        n_iter: usize,
        v_iter: usize,
    },
    Gnf {
        /// Neighbourhood radius as a multiple of the mean edge length.
        radius: f64,
        /// Spatial bandwidth as a multiple of the mean adjacent-centroid distance.
        sigma_s_mult: f64,
        sigma_r: f64,
        n_iter: usize,
        v_iter: usize,
    },
    L1Median {
        angle_max_deg: f64,
        n_iter: usize,
        v_iter: usize,
    },
}

fn iteration_count(v: f64, what: &str) -> MeshResult<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(MeshError::InvalidParameter(format!("{what} must be a non-negative integer, got {v}")))
    }
}

impl DenoiseParams {
    pub fn from_tuple(method: Method, values: &[f64]) -> MeshResult<Self> {
        if values.len() != method.arity() {
            return Err(MeshError::InvalidParameter(format!(
                "{method} takes {} parameters, got {}",
                method.arity(),
                values.len()
            )));
        }
        let p = match method {
            Method::Unf => DenoiseParams::Unf {
                threshold: values[0],
                n_iter: iteration_count(values[1], "n_iter")?,
                v_iter: iteration_count(values[2], "v_iter")?,
            },
            Method::Bnf => DenoiseParams::Bnf {
                sigma_r: values[0],
                n_iter: iteration_count(values[1], "n_iter")?,
                v_iter: iteration_count(values[2], "v_iter")?,
            },
            Method::Gnf => DenoiseParams::Gnf {
                radius: values[0],
                sigma_s_mult: values[1],
                sigma_r: values[2],
                n_iter: iteration_count(values[3], "n_iter")?,
                v_iter: iteration_count(values[4], "v_iter")?,
            },
            Method::L1Median => DenoiseParams::L1Median {
                angle_max_deg: values[0],
                n_iter: iteration_count(values[1], "n_iter")?,
                v_iter: iteration_count(values[2], "v_iter")?,
            },
        };
        p.validate()?;
        Ok(p)
    }

    /// Parses a comma-separated tuple such as `0.45,200,100`.
    pub fn parse(method: Method, tuple: &str) -> MeshResult<Self> {
        let values = tuple
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| MeshError::InvalidParameter(format!("bad parameter tuple {tuple:?}: {e}")))?;
        Self::from_tuple(method, &values)
    }

    pub fn method(&self) -> Method {
        match self {
            DenoiseParams::Unf { .. } => Method::Unf,
            DenoiseParams::Bnf { .. } => Method::Bnf,
            DenoiseParams::Gnf { .. } => Method::Gnf,
            DenoiseParams::L1Median { .. } => Method::L1Median,
        }
    }

    pub fn tuple(&self) -> Vec<f64> {
        match *self {
            DenoiseParams::Unf { threshold, n_iter, v_iter } => vec![threshold, n_iter as f64, v_iter as f64],
            DenoiseParams::Bnf { sigma_r, n_iter, v_iter } => vec![sigma_r, n_iter as f64, v_iter as f64],
            DenoiseParams::Gnf { radius, sigma_s_mult, sigma_r, n_iter, v_iter } => {
                vec![radius, sigma_s_mult, sigma_r, n_iter as f64, v_iter as f64]
            }
            DenoiseParams::L1Median { angle_max_deg, n_iter, v_iter } => {
                vec![angle_max_deg, n_iter as f64, v_iter as f64]
            }
        }
    }

    pub fn n_iter(&self) -> usize {
        match *self {
            DenoiseParams::Unf { n_iter, .. }
            | DenoiseParams::Bnf { n_iter, .. }
            | DenoiseParams::Gnf { n_iter, .. }
            | DenoiseParams::L1Median { n_iter, .. } => n_iter,
        }
    }

    pub fn v_iter(&self) -> usize {
        match *self {
            DenoiseParams::Unf { v_iter, .. }
            | DenoiseParams::Bnf { v_iter, .. }
            | DenoiseParams::Gnf { v_iter, .. }
            | DenoiseParams::L1Median { v_iter, .. } => v_iter,
        }
    }

    pub fn validate(&self) -> MeshResult<()> {
        let bad = |msg: String| Err(MeshError::InvalidParameter(msg));
        if self.n_iter() < 1 || self.v_iter() < 1 {
            return bad(format!("iteration counts must be >= 1 ({self})"));
        }
        match *self {
            DenoiseParams::Unf { threshold, .. } if !(-1.0..=1.0).contains(&threshold) => {
                bad(format!("UNF threshold must lie in [-1, 1], got {threshold}"))
            }
            DenoiseParams::Bnf { sigma_r, .. } if !(sigma_r > 0.0) => bad(format!("sigma_r must be > 0, got {sigma_r}")),
            DenoiseParams::Gnf { radius, sigma_s_mult, sigma_r, .. }
                if !(radius > 0.0 && sigma_s_mult > 0.0 && sigma_r > 0.0) =>
            {
                bad(format!("GNF needs r, sigma_s, sigma_r > 0 ({self})"))
            }
            DenoiseParams::L1Median { angle_max_deg, .. } if !(angle_max_deg > 0.0) => {
                bad(format!("angle threshold must be > 0, got {angle_max_deg}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DenoiseParams {
    /// Comma tuple in parameter-table order, e.g. `0.45,200,100`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tuple().iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Base neighbourhood shape.
#[derive(Debug, Clone, Copy)]
pub enum NeighborScheme<'a> {
    /// Faces within `depth` edge-adjacency steps.
    EdgeRing { depth: usize },
    /// Faces whose centroid lies in the index radius.
    Geometric(&'a CentroidIndex<'a>),
}

/// Neighbours of `face` (excluding itself), restricted to its cluster when
/// labels are given. Sorted ascending.
pub fn neighbors(face: usize, topo: &Topology, labels: Option<&ClusterLabels>, scheme: &NeighborScheme) -> Vec<usize> {
    let mut base = match scheme {
        NeighborScheme::EdgeRing { depth: 1 } => topo.face_adjacent[face].clone(),
        NeighborScheme::EdgeRing { depth } => topo.face_ring(face, *depth),
        NeighborScheme::Geometric(index) => index.query(face),
    };
    if let Some(labels) = labels {
        let own = labels.label[face];
        base.retain(|&j| labels.label[j] == own);
    }
    base
}

/// Filters normals with the chosen backend and runs the vertex update.
pub fn denoise(mesh: &TriMesh, params: &DenoiseParams, labels: Option<&ClusterLabels>) -> MeshResult<TriMesh> {
    params.validate()?;
    if let Some(l) = labels {
        if l.len() != mesh.face_count() {
            return Err(MeshError::LabelLengthMismatch {
                labels: l.len(),
                faces: mesh.face_count(),
            });
        }
    }
    let topo = Topology::build(mesh)?;
    let geometry = FaceGeometry::compute(mesh)?;
    let normals = filter_normals(&topo, &geometry, labels, params);
    Ok(vertex_update(mesh, &topo, &normals, params.v_iter()))
}

/// Full pipeline: optionally segment (through the pre-filter configured in
/// `segmentation`), then denoise the original positions with the resulting
/// cluster constraint.
pub fn denoise_pipeline(
    noisy: &TriMesh,
    params: &DenoiseParams,
    segmentation: Option<&SegmentParams>,
) -> MeshResult<(TriMesh, Option<ClusterLabels>)> {
    let labels = segmentation.map(|s| segment(noisy, s)).transpose()?;
    let out = denoise(noisy, params, labels.as_ref())?;
    Ok((out, labels))
}
