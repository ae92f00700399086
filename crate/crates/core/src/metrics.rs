//! Error metrics against a ground-truth mesh.
//!
//! * `msae`: mean squared angle (radians²) between corresponding face normals.
//! * `ev`: mean squared distance from result vertices to the truth surface,
//!   divided by the squared bounding-box diagonal of the truth mesh.

use rayon::prelude::*;

use crate::bvh::TriangleBvh;
use crate::error::{MeshError, MeshResult};
use crate::mesh::{FaceGeometry, TriMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub msae: f64,
    pub ev: f64,
    pub face_angles: Option<Vec<f64>>,
}

fn mismatch(result: &TriMesh, truth: &TriMesh) -> MeshError {
    MeshError::ConnectivityMismatch {
        result_vertices: result.vertex_count(),
        result_faces: result.face_count(),
        truth_vertices: truth.vertex_count(),
        truth_faces: truth.face_count(),
    }
}

/// Per-face angle between normals in radians (atan2 form, exact at 0).
pub fn face_angles(result: &TriMesh, truth: &TriMesh) -> MeshResult<Vec<f64>> {
    if result.face_count() != truth.face_count() {
        return Err(mismatch(result, truth));
    }
    let a = FaceGeometry::compute(result)?;
    let b = FaceGeometry::compute(truth)?;
    Ok(a.normals
        .iter()
        .zip(&b.normals)
        .map(|(x, y)| x.cross(y).norm().atan2(x.dot(y)))
        .collect())
}

pub fn msae(result: &TriMesh, truth: &TriMesh) -> MeshResult<f64> {
    if !result.same_connectivity(truth) {
        return Err(mismatch(result, truth));
    }
    if truth.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let angles = face_angles(result, truth)?;
    Ok(angles.iter().map(|a| a * a).sum::<f64>() / angles.len() as f64)
}

pub fn ev(result: &TriMesh, truth: &TriMesh) -> MeshResult<f64> {
    ev_with(result, truth, &TriangleBvh::build(truth))
}

/// `ev` with a prebuilt hierarchy over `truth`.
pub fn ev_with(result: &TriMesh, truth: &TriMesh, bvh: &TriangleBvh) -> MeshResult<f64> {
    if truth.is_empty() || result.vertex_count() == 0 {
        return Err(MeshError::EmptyMesh);
    }
    let diag2 = truth.bbox_diagonal().powi(2);
    let sum: f64 = result
        .vertices()
        .par_iter()
        .map(|p| bvh.nearest_distance_squared(p))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(sum / result.vertex_count() as f64 / diag2)
}

/// Brute-force `ev`, scanning every triangle for every vertex.
pub fn ev_brute_force(result: &TriMesh, truth: &TriMesh) -> MeshResult<f64> {
    if truth.is_empty() || result.vertex_count() == 0 {
        return Err(MeshError::EmptyMesh);
    }
    let tris: Vec<_> = (0..truth.face_count()).map(|f| truth.face_points(f)).collect();
    let sum: f64 = result
        .vertices()
        .iter()
        .map(|p| {
            tris.iter()
                .map(|t| crate::bvh::point_triangle_distance_squared(p, t))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(sum / result.vertex_count() as f64 / truth.bbox_diagonal().powi(2))
}

pub fn evaluate(result: &TriMesh, truth: &TriMesh, keep_angles: bool) -> MeshResult<MetricsReport> {
    let msae = msae(result, truth)?;
    let ev = ev(result, truth)?;
    let face_angles = keep_angles.then(|| face_angles(result, truth)).transpose()?;
    Ok(MetricsReport { msae, ev, face_angles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::noise::{add_noise, NoiseSpec};
    use nalgebra::{Point3, Rotation3, Unit, Vector3};

    #[test]
    fn identical_meshes_score_zero() {
        let m = fixtures::icosphere(2);
        assert_eq!(msae(&m, &m).unwrap(), 0.0);
        assert_eq!(ev(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_normals() {
        let v = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        let a = TriMesh::new(v, vec![[0, 1, 2]]).unwrap();
        let b = a.map_vertices(|p| Point3::new(p.x, 0.0, p.y));
        let want = std::f64::consts::FRAC_PI_2.powi(2);
        assert!((msae(&a, &b).unwrap() - want).abs() < 1e-9);
        assert!((want - 2.4674).abs() < 1e-4);
    }

    #[test]
    fn known_per_face_rotation() {
        // Disjoint triangles, each tilted by 0.1 rad about an in-plane axis through its centroid.
        let mut verts = Vec::new();
        let mut tilted = Vec::new();
        let mut faces = Vec::new();
        for k in 0..10 {
            let off = Vector3::new(3.0 * k as f64, 0.0, 0.0);
            let tri = [Point3::new(0.0, 0.0, 0.0) + off, Point3::new(1.0, 0.2, 0.0) + off, Point3::new(0.3, 1.0, 0.0) + off];
            let c = Point3::from((tri[0].coords + tri[1].coords + tri[2].coords) / 3.0);
            let axis = Unit::new_normalize(Vector3::new((k as f64).cos(), (k as f64).sin(), 0.0));
            let rot = Rotation3::from_axis_angle(&axis, 0.1);
            for p in tri {
                verts.push(p);
                tilted.push(c + rot * (p - c));
            }
            faces.push([3 * k, 3 * k + 1, 3 * k + 2]);
        }
        let a = TriMesh::new(verts, faces.clone()).unwrap();
        let b = TriMesh::new(tilted, faces).unwrap();
        assert!((msae(&a, &b).unwrap() - 0.01).abs() < 1e-9);
    }

    #[test]
    fn lifted_square() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let truth = TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let h = 0.3;
        let lifted = truth.map_vertices(|p| p + Vector3::new(0.0, 0.0, h));
        assert!((ev(&lifted, &truth).unwrap() - h * h / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mismatch_and_empty() {
        assert!(matches!(
            msae(&fixtures::cube(1), &fixtures::cube(2)),
            Err(MeshError::ConnectivityMismatch { result_faces: 12, truth_faces: 48, .. })
        ));
        let empty = TriMesh::new(vec![], vec![]).unwrap();
        assert!(matches!(ev(&fixtures::cube(1), &empty), Err(MeshError::EmptyMesh)));
    }

    #[test]
    fn bvh_matches_brute_force() {
        let truth = fixtures::icosphere(3);
        let noisy = add_noise(&fixtures::icosphere(4), &NoiseSpec::new(0.5, 3)).unwrap();
        let a = ev(&noisy, &truth).unwrap();
        let b = ev_brute_force(&noisy, &truth).unwrap();
        assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        assert!(a > 0.0);
    }

    #[test]
    fn rigid_invariance() {
        let truth = fixtures::cube(4);
        let noisy = add_noise(&truth, &NoiseSpec::new(0.2, 9)).unwrap();
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(1.0, 2.0, 3.0)), 0.7);
        let t = Vector3::new(-4.0, 1.0, 2.0);
        let m = |p: &Point3<f64>| rot * p + t;
        let (a, b) = (noisy.map_vertices(m), truth.map_vertices(m));
        assert!((msae(&noisy, &truth).unwrap() - msae(&a, &b).unwrap()).abs() < 1e-10);
        // bbox diagonal of a rotated box changes, so compare the unnormalised distances
        let raw = |r: &TriMesh, t: &TriMesh| ev(r, t).unwrap() * t.bbox_diagonal().powi(2);
        assert!((raw(&noisy, &truth) - raw(&a, &b)).abs() < 1e-10);
    }
}
