use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use tracing::warn;

use crate::mesh::{Topology, TriMesh};

/// Moves vertices so faces agree with the target `normals`.
///
/// Each of the `v_iter` Jacobi sweeps sets
/// `x_i += mean_{k in F(i)} n_k (n_k . (c_k - x_i))` with face centroids
/// `c_k` taken from the previous sweep. Vertices without faces stay put.
pub fn vertex_update(mesh: &TriMesh, topo: &Topology, normals: &[Vector3<f64>], v_iter: usize) -> TriMesh {
    let isolated = topo.vertex_faces.iter().filter(|f| f.is_empty()).count();
    if isolated > 0 {
        warn!(isolated, "vertices without incident faces are left unchanged");
    }
    let faces = mesh.faces();
    let mut current: Vec<Point3<f64>> = mesh.vertices().to_vec();
    for _ in 0..v_iter {
        let centroids: Vec<Point3<f64>> = faces
            .par_iter()
            .map(|&[a, b, c]| Point3::from((current[a].coords + current[b].coords + current[c].coords) / 3.0))
            .collect();
        current = current
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let incident = &topo.vertex_faces[i];
                if incident.is_empty() {
                    return *x;
                }
                let mut delta = Vector3::zeros();
                for &k in incident {
                    let n = normals[k];
                    delta += n * n.dot(&(centroids[k] - x));
                }
                x + delta / incident.len() as f64
            })
            .collect();
    }
    mesh.with_vertices(current)
}
