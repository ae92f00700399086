use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use super::median::weighted_geometric_median;
use super::{neighbors, DenoiseParams, NeighborScheme, NormalField};
use crate::mesh::{CentroidIndex, FaceGeometry, Topology};
use crate::segment::ClusterLabels;

const MEDIAN_ITERS: usize = 20;
const MEDIAN_TOL: f64 = 1e-8;

fn normalize_or(v: Vector3<f64>, fallback: Vector3<f64>) -> Vector3<f64> {
    let len = v.norm();
    if len > 0.0 && len.is_finite() {
        v / len
    } else {
        fallback
    }
}

fn neighbor_lists(topo: &Topology, labels: Option<&ClusterLabels>, scheme: &NeighborScheme) -> Vec<Vec<usize>> {
    (0..topo.face_edges.len())
        .into_par_iter()
        .map(|f| neighbors(f, topo, labels, scheme))
        .collect()
}

fn sweeps(initial: &[Vector3<f64>], n_iter: usize, step: impl Fn(&[Vector3<f64>], usize) -> Vector3<f64> + Sync) -> NormalField {
    let mut current = initial.to_vec();
    for _ in 0..n_iter {
        current = (0..current.len()).into_par_iter().map(|i| step(&current, i)).collect();
    }
    current
}

fn spatial_sigma(topo: &Topology, geometry: &FaceGeometry) -> f64 {
    let s = geometry.mean_adjacent_centroid_distance(topo);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Unilateral filter: neighbours with `n_i . n_j > T` contribute with weight
/// `A_j (n_i . n_j - T)^2`; the face itself with `A_i (1 - T)^2`.
pub fn filter_unf(
    topo: &Topology,
    geometry: &FaceGeometry,
    labels: Option<&ClusterLabels>,
    threshold: f64,
    n_iter: usize,
) -> NormalField {
    let nbrs = neighbor_lists(topo, labels, &NeighborScheme::EdgeRing { depth: 1 });
    let areas = &geometry.areas;
    let self_w = (1.0 - threshold).powi(2);
    sweeps(&geometry.normals, n_iter, |prev, i| {
        let ni = prev[i];
        let mut sum = ni * (areas[i] * self_w);
        for &j in &nbrs[i] {
            let d = ni.dot(&prev[j]);
            if d > threshold {
                sum += prev[j] * (areas[j] * (d - threshold).powi(2));
            }
        }
        normalize_or(sum, ni)
    })
}

/// Bilateral filter with a spatial kernel on centroid distance and a range
/// kernel on normal difference, plus the area-weighted self term.
pub fn filter_bnf(
    topo: &Topology,
    geometry: &FaceGeometry,
    labels: Option<&ClusterLabels>,
    sigma_r: f64,
    n_iter: usize,
) -> NormalField {
    let nbrs = neighbor_lists(topo, labels, &NeighborScheme::EdgeRing { depth: 1 });
    let sigma_c = spatial_sigma(topo, geometry);
    let two_sc2 = 2.0 * sigma_c * sigma_c;
    let two_sr2 = 2.0 * sigma_r * sigma_r;
    let spatial: Vec<Vec<f64>> = nbrs
        .iter()
        .enumerate()
        .map(|(i, list)| {
            list.iter()
                .map(|&j| geometry.areas[j] * (-(geometry.centroids[i] - geometry.centroids[j]).norm_squared() / two_sc2).exp())
                .collect()
        })
        .collect();
    sweeps(&geometry.normals, n_iter, |prev, i| {
        let ni = prev[i];
        let mut sum = ni * geometry.areas[i];
        for (&j, &ws) in nbrs[i].iter().zip(&spatial[i]) {
            let wr = (-(ni - prev[j]).norm_squared() / two_sr2).exp();
            sum += prev[j] * (ws * wr);
        }
        normalize_or(sum, ni)
    })
}

struct Patch {
    /// Largest pairwise normal difference; lower is more consistent.
    spread: f64,
    centroid: Point3<f64>,
    normal: Vector3<f64>,
}

fn patch_stats(members: &[usize], normals: &[Vector3<f64>], geometry: &FaceGeometry) -> Patch {
    let mut spread: f64 = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            spread = spread.max((normals[i] - normals[j]).norm());
        }
    }
    let mut avg = Vector3::zeros();
    let mut centroid = Vector3::zeros();
    let mut area = 0.0;
    for &k in members {
        avg += normals[k] * geometry.areas[k];
        centroid += geometry.centroids[k].coords * geometry.areas[k];
        area += geometry.areas[k];
    }
    Patch {
        spread,
        centroid: Point3::from(centroid / area),
        normal: normalize_or(avg, normals[members[0]]),
    }
}

/// Guided filter: each face picks, among the patches centred on its
/// geometric neighbours, the one with the smallest normal spread and uses its
/// average normal as guidance for a joint bilateral update.
pub fn filter_gnf(
    topo: &Topology,
    geometry: &FaceGeometry,
    labels: Option<&ClusterLabels>,
    radius: f64,
    sigma_s_mult: f64,
    sigma_r: f64,
    n_iter: usize,
) -> NormalField {
    let index = CentroidIndex::new(&geometry.centroids, radius * topo.mean_edge_length);
    let nbrs = neighbor_lists(topo, labels, &NeighborScheme::Geometric(&index));
    // patch centred on j: j and its edge neighbours, within j's cluster
    let patches: Vec<Vec<usize>> = (0..nbrs.len())
        .map(|j| {
            let mut p = vec![j];
            p.extend(neighbors(j, topo, labels, &NeighborScheme::EdgeRing { depth: 1 }));
            p
        })
        .collect();
    let sigma_s = spatial_sigma(topo, geometry) * sigma_s_mult;
    let two_ss2 = 2.0 * sigma_s * sigma_s;
    let two_sr2 = 2.0 * sigma_r * sigma_r;

    let mut current = geometry.normals.clone();
    for _ in 0..n_iter {
        let stats: Vec<Patch> = patches.par_iter().map(|p| patch_stats(p, &current, geometry)).collect();
        let guidance: Vec<Vector3<f64>> = (0..nbrs.len())
            .into_par_iter()
            .map(|i| {
                let ci = geometry.centroids[i];
                let mut best = i;
                let mut best_key = (stats[i].spread, (stats[i].centroid - ci).norm());
                for &j in &nbrs[i] {
                    let key = (stats[j].spread, (stats[j].centroid - ci).norm());
                    if key.0 < best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
                        best = j;
                        best_key = key;
                    }
                }
                stats[best].normal
            })
            .collect();
        current = (0..nbrs.len())
            .into_par_iter()
            .map(|i| {
                let ci = geometry.centroids[i];
                let gi = guidance[i];
                let mut sum = current[i] * geometry.areas[i];
                for &j in &nbrs[i] {
                    let ws = (-(ci - geometry.centroids[j]).norm_squared() / two_ss2).exp();
                    let wr = (-(gi - guidance[j]).norm_squared() / two_sr2).exp();
                    sum += current[j] * (geometry.areas[j] * ws * wr);
                }
                normalize_or(sum, current[i])
            })
            .collect();
    }
    current
}

/// Median filter: weighted geometric median of the face normal and the
/// neighbour normals within `angle_max_deg`, weighted by a spatial Gaussian.
pub fn filter_l1median(
    topo: &Topology,
    geometry: &FaceGeometry,
    labels: Option<&ClusterLabels>,
    angle_max_deg: f64,
    n_iter: usize,
) -> NormalField {
    let nbrs = neighbor_lists(topo, labels, &NeighborScheme::EdgeRing { depth: 1 });
    let sigma_c = spatial_sigma(topo, geometry);
    let two_sc2 = 2.0 * sigma_c * sigma_c;
    let cos_max = angle_max_deg.to_radians().cos();
    sweeps(&geometry.normals, n_iter, |prev, i| {
        let ni = prev[i];
        let mut points = vec![ni];
        let mut weights = vec![1.0];
        for &j in &nbrs[i] {
            if ni.dot(&prev[j]) >= cos_max {
                points.push(prev[j]);
                weights.push((-(geometry.centroids[i] - geometry.centroids[j]).norm_squared() / two_sc2).exp());
            }
        }
        if points.len() == 1 {
            return ni;
        }
        normalize_or(weighted_geometric_median(&points, &weights, MEDIAN_ITERS, MEDIAN_TOL), ni)
    })
}

/// Dispatches on the backend.
pub fn filter_normals(
    topo: &Topology,
    geometry: &FaceGeometry,
    labels: Option<&ClusterLabels>,
    params: &DenoiseParams,
) -> NormalField {
    match *params {
        DenoiseParams::Unf { threshold, n_iter, .. } => filter_unf(topo, geometry, labels, threshold, n_iter),
        DenoiseParams::Bnf { sigma_r, n_iter, .. } => filter_bnf(topo, geometry, labels, sigma_r, n_iter),
        DenoiseParams::Gnf { radius, sigma_s_mult, sigma_r, n_iter, .. } => {
            filter_gnf(topo, geometry, labels, radius, sigma_s_mult, sigma_r, n_iter)
        }
        DenoiseParams::L1Median { angle_max_deg, n_iter, .. } => {
            filter_l1median(topo, geometry, labels, angle_max_deg, n_iter)
        }
    }
}
