//! Area-weighted differential edge operator on edge flaps.
//!
//! For a flap with shared edge `p1 p3` and apexes `p2`, `p4`, the operator is
//! a linear combination `c1 p1 + c2 p2 + c3 p3 + c4 p4` whose coefficients
//! depend on the two triangle areas and sum to zero. Its norm vanishes when
//! both triangles lie in one plane, so it separates feature edges from flat
//! ones without touching face normals.

use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{MeshError, MeshResult};
use crate::mesh::{flap_of_edge, Flap, Topology, TriMesh};

/// Relative floor on flap triangle areas, scaled by the squared mean edge length.
pub const AREA_EPS: f64 = 1e-12;

/// Linear coefficients `[c1, c2, c3, c4]` of the operator for `flap`.
///
/// Returns `DegenerateFlap` when either triangle area is below `min_area`.
pub fn edge_operator_coefficients(flap: &Flap, min_area: f64) -> MeshResult<[f64; 4]> {
    let (p1, p2, p3, p4) = (flap.p1, flap.p2, flap.p3, flap.p4);
    let a123 = flap.area_123();
    let a134 = flap.area_134();
    if !(a123 >= min_area && a134 >= min_area) || a123 + a134 <= 0.0 {
        return Err(MeshError::DegenerateFlap { edge: None, min_area });
    }
    let sum = a123 + a134;
    let e = p3 - p1;
    let denom = e.norm_squared() * sum;
    let c1 = (a123 * (p4 - p3).dot(&(p3 - p1)) + a134 * (p1 - p3).dot(&(p3 - p2))) / denom;
    let c2 = a134 / sum;
    let c3 = (a123 * (p3 - p1).dot(&(p1 - p4)) + a134 * (p2 - p1).dot(&(p1 - p3))) / denom;
    let c4 = a123 / sum;
    Ok([c1, c2, c3, c4])
}

/// Operator value for a single flap.
pub fn edge_operator(flap: &Flap, min_area: f64) -> MeshResult<Vector3<f64>> {
    let [c1, c2, c3, c4] = edge_operator_coefficients(flap, min_area)?;
    Ok(c1 * flap.p1.coords + c2 * flap.p2.coords + c3 * flap.p3.coords + c4 * flap.p4.coords)
}

/// Operator values and norms for every edge of a mesh.
#[derive(Debug, Clone)]
pub struct EdgeOperatorField {
    /// Operator vector per edge; zero for boundary edges.
    pub values: Vec<Vector3<f64>>,
    /// `||values[e]||`, or `+inf` on boundary edges.
    pub norms: Vec<f64>,
}

impl EdgeOperatorField {
    pub fn compute(mesh: &TriMesh, topo: &Topology) -> MeshResult<Self> {
        let min_area = AREA_EPS * topo.mean_edge_length * topo.mean_edge_length;
        let values: Vec<Option<Vector3<f64>>> = (0..topo.edge_count())
            .into_par_iter()
            .map(|e| {
                if topo.is_boundary(e) {
                    return Ok(None);
                }
                let flap = flap_of_edge(mesh, topo, e)?;
                edge_operator(&flap, min_area)
                    .map(Some)
                    .map_err(|_| MeshError::DegenerateFlap { edge: Some(e), min_area })
            })
            .collect::<MeshResult<_>>()?;
        let norms = values.iter().map(|v| v.map_or(f64::INFINITY, |v| v.norm())).collect();
        let values = values.into_iter().map(|v| v.unwrap_or_else(Vector3::zeros)).collect();
        Ok(Self { values, norms })
    }

    /// Writes `edge_id,v0,v1,norm` rows, one per edge.
    pub fn write_csv<W: Write>(&self, topo: &Topology, mut out: W) -> std::io::Result<()> {
        writeln!(out, "edge_id,v0,v1,norm")?;
        for (e, (&[v0, v1], norm)) in topo.edges.iter().zip(&self.norms).enumerate() {
            writeln!(out, "{e},{v0},{v1},{norm}")?;
        }
        Ok(())
    }
}
