//! Quadratic pre-filter used to stabilise segmentation on heavily noisy input.
//!
//! Minimises
//!
//! ```text
//! sum_i |x_i - p_i|^2 + alpha * sum_e w(e) |D_e x|^2 + beta * sum_e w(e) |R_e x|^2
//! ```
//!
//! where `D_e` is the area-weighted edge operator and `R_e` the flap
//! second difference. Both operators and the edge weights are frozen from the
//! input geometry, so the problem is linear least squares:
//! `(I + alpha A^T W A + beta B^T W B) x = p`, one solve per coordinate.

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::edgeop::{edge_operator_coefficients, AREA_EPS};
use crate::error::{MeshError, MeshResult};
use crate::mesh::{flap_of_edge, FaceGeometry, Flap, Topology, TriMesh};
use crate::sparse::{conjugate_gradient, CsrMatrix};

/// Coefficients of the flap second difference on `(p1, p2, p3, p4)`.
pub const REGULARIZER_COEFFS: [f64; 4] = [0.5, -0.5, 0.5, -0.5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefilterParams {
    pub alpha: f64,
    pub beta: f64,
    /// Bandwidth on `|n_a - n_b|` for the edge weights.
    pub sigma_w: f64,
    pub solver_tol: f64,
    /// `None` uses `max(ceil(10 sqrt(V)), 100)`.
    pub solver_max_iter: Option<usize>,
    /// Extra solves with coefficients re-frozen from the previous output.
    pub refreeze: usize,
}

impl Default for PrefilterParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.1,
            sigma_w: 0.35,
            solver_tol: 1e-8,
            solver_max_iter: None,
            refreeze: 0,
        }
    }
}

impl PrefilterParams {
    /// Heavier smoothing for noise around half the mean edge length: strong
    /// terms with a narrow edge weight, re-frozen three times so creases
    /// sharpen back up between solves.
    pub fn heavy_noise() -> Self {
        Self {
            alpha: 10.0,
            beta: 10.0,
            sigma_w: 0.5,
            refreeze: 3,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> MeshResult<()> {
        let ok = self.alpha >= 0.0 && self.beta >= 0.0 && self.sigma_w > 0.0 && self.solver_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(MeshError::InvalidParameter(format!(
                "prefilter needs alpha >= 0, beta >= 0, sigma_w > 0, solver_tol > 0 (got {self:?})"
            )))
        }
    }

    fn max_iter(&self, vertex_count: usize) -> usize {
        self.solver_max_iter
            .unwrap_or_else(|| ((10.0 * (vertex_count as f64).sqrt()).ceil() as usize).max(100))
    }
}

/// Gaussian weight on the normal jump across each edge; 0 on boundary edges.
pub fn edge_weights(topo: &Topology, geometry: &FaceGeometry, sigma_w: f64) -> Vec<f64> {
    let two_s2 = 2.0 * sigma_w * sigma_w;
    topo.edge_faces
        .iter()
        .map(|faces| match faces[..] {
            [a, b] => (-(geometry.normals[a] - geometry.normals[b]).norm_squared() / two_s2).exp(),
            _ => 0.0,
        })
        .collect()
}

/// `(p1 + p3)/2 - (p2 + p4)/2`: zero whenever the flap's diagonals bisect each other.
pub fn regularizer(flap: &Flap) -> Vector3<f64> {
    let [a, b, c, d] = REGULARIZER_COEFFS;
    a * flap.p1.coords + b * flap.p2.coords + c * flap.p3.coords + d * flap.p4.coords
}

#[derive(Debug, Clone, Copy)]
struct FrozenRow {
    vertices: [usize; 4],
    d: [f64; 4],
    weight: f64,
}

/// Quadratic energy with operator coefficients and weights frozen from one geometry.
#[derive(Debug, Clone)]
pub struct FrozenQuadratic {
    alpha: f64,
    beta: f64,
    rows: Vec<FrozenRow>,
    vertex_count: usize,
}

impl FrozenQuadratic {
    pub fn freeze(mesh: &TriMesh, topo: &Topology, params: &PrefilterParams) -> MeshResult<Self> {
        params.validate()?;
        let geometry = FaceGeometry::compute(mesh)?;
        let weights = edge_weights(topo, &geometry, params.sigma_w);
        let min_area = AREA_EPS * topo.mean_edge_length * topo.mean_edge_length;
        let rows = (0..topo.edge_count())
            .into_par_iter()
            .filter(|&e| !topo.is_boundary(e))
            .map(|e| {
                let flap = flap_of_edge(mesh, topo, e)?;
                let d = edge_operator_coefficients(&flap, min_area)
                    .map_err(|_| MeshError::DegenerateFlap { edge: Some(e), min_area })?;
                Ok(FrozenRow {
                    vertices: flap.vertices,
                    d,
                    weight: weights[e],
                })
            })
            .collect::<MeshResult<Vec<_>>>()?;
        Ok(Self {
            alpha: params.alpha,
            beta: params.beta,
            rows,
            vertex_count: mesh.vertex_count(),
        })
    }

    /// Energy of positions `x` against data positions `p`.
    pub fn energy(&self, p: &[Point3<f64>], x: &[Point3<f64>]) -> f64 {
        let data: f64 = p.iter().zip(x).map(|(p, x)| (x - p).norm_squared()).sum();
        let mut smooth = 0.0;
        for row in &self.rows {
            let mut dv = Vector3::zeros();
            let mut rv = Vector3::zeros();
            for k in 0..4 {
                let xk = x[row.vertices[k]].coords;
                dv += row.d[k] * xk;
                rv += REGULARIZER_COEFFS[k] * xk;
            }
            smooth += row.weight * (self.alpha * dv.norm_squared() + self.beta * rv.norm_squared());
        }
        data + smooth
    }

    /// `I + alpha A^T W A + beta B^T W B`.
    pub fn system_matrix(&self) -> CsrMatrix {
        let mut triplets: Vec<(usize, usize, f64)> = (0..self.vertex_count).map(|i| (i, i, 1.0)).collect();
        triplets.reserve(self.rows.len() * 16);
        for row in &self.rows {
            for (a, (&da, &ra)) in row.d.iter().zip(&REGULARIZER_COEFFS).enumerate() {
                for (b, (&db, &rb)) in row.d.iter().zip(&REGULARIZER_COEFFS).enumerate() {
                    let v = row.weight * (self.alpha * da * db + self.beta * ra * rb);
                    if v != 0.0 {
                        triplets.push((row.vertices[a], row.vertices[b], v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.vertex_count, triplets)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefilterReport {
    /// CG iterations per coordinate axis in the last solve.
    pub iterations: [usize; 3],
    /// Relative residual `||M x - p|| / ||p||` per axis in the last solve.
    pub residuals: [f64; 3],
}

fn solve_frozen(
    system: &FrozenQuadratic,
    data: &[Point3<f64>],
    start: &[Point3<f64>],
    params: &PrefilterParams,
) -> MeshResult<(Vec<Point3<f64>>, PrefilterReport)> {
    let m = system.system_matrix();
    let max_iter = params.max_iter(data.len());
    let axes: Vec<_> = (0..3)
        .into_par_iter()
        .map(|axis| {
            let b: Vec<f64> = data.iter().map(|p| p[axis]).collect();
            let mut x: Vec<f64> = start.iter().map(|p| p[axis]).collect();
            let out = conjugate_gradient(&m, &b, &mut x, params.solver_tol, max_iter);
            (x, out)
        })
        .collect();
    let mut report = PrefilterReport {
        iterations: [0; 3],
        residuals: [0.0; 3],
    };
    for (axis, (_, out)) in axes.iter().enumerate() {
        report.iterations[axis] = out.iterations;
        report.residuals[axis] = out.relative_residual;
        if !out.converged {
            return Err(MeshError::SolverDiverged {
                residual: out.relative_residual,
                iterations: out.iterations,
                tol: params.solver_tol,
            });
        }
    }
    let positions = (0..data.len())
        .map(|i| Point3::new(axes[0].0[i], axes[1].0[i], axes[2].0[i]))
        .collect();
    Ok((positions, report))
}

pub fn prefilter(mesh: &TriMesh, params: &PrefilterParams) -> MeshResult<TriMesh> {
    prefilter_with_report(mesh, params).map(|(m, _)| m)
}

pub fn prefilter_with_report(mesh: &TriMesh, params: &PrefilterParams) -> MeshResult<(TriMesh, PrefilterReport)> {
    params.validate()?;
    let topo = Topology::build(mesh)?;
    let data = mesh.vertices();
    let mut current = mesh.clone();
    let mut report = None;
    for _ in 0..=params.refreeze {
        let system = FrozenQuadratic::freeze(&current, &topo, params)?;
        let (positions, r) = solve_frozen(&system, data, current.vertices(), params)?;
        current = mesh.with_vertices(positions);
        report = Some(r);
    }
    Ok((current, report.expect("at least one solve runs")))
}
