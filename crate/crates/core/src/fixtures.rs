//! Procedural test meshes: subdivided cube, flat-faceted icosahedron,
//! icosphere and planar grid.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::mesh::TriMesh;

/// Unit cube `[0,1]^3`, each side an `n x n` grid of split quads:
/// `12 n^2` faces, closed and outward-oriented.
///
/// # Panics
/// If `n == 0`.
pub fn cube(n: usize) -> TriMesh {
    assert!(n >= 1, "cube needs at least one cell per side");
    // (origin, u, v) in lattice units; u x v is the outward normal.
    let sides: [([i64; 3], [i64; 3], [i64; 3]); 6] = [
        ([0, 0, 0], [0, 1, 0], [1, 0, 0]),
        ([0, 0, 1], [1, 0, 0], [0, 1, 0]),
        ([0, 0, 0], [0, 0, 1], [0, 1, 0]),
        ([1, 0, 0], [0, 1, 0], [0, 0, 1]),
        ([0, 0, 0], [1, 0, 0], [0, 0, 1]),
        ([0, 1, 0], [0, 0, 1], [1, 0, 0]),
    ];
    let n_i = n as i64;
    let mut lookup: HashMap<[i64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(12 * n * n);
    let mut vid = |key: [i64; 3], vertices: &mut Vec<Point3<f64>>| {
        *lookup.entry(key).or_insert_with(|| {
            vertices.push(Point3::new(
                key[0] as f64 / n as f64,
                key[1] as f64 / n as f64,
                key[2] as f64 / n as f64,
            ));
            vertices.len() - 1
        })
    };
    for (origin, u, v) in sides {
        let at = |i: i64, j: i64| -> [i64; 3] {
            [
                origin[0] * n_i + i * u[0] + j * v[0],
                origin[1] * n_i + i * u[1] + j * v[1],
                origin[2] * n_i + i * u[2] + j * v[2],
            ]
        };
        for i in 0..n_i {
            for j in 0..n_i {
                let a = vid(at(i, j), &mut vertices);
                let b = vid(at(i + 1, j), &mut vertices);
                let c = vid(at(i + 1, j + 1), &mut vertices);
                let d = vid(at(i, j + 1), &mut vertices);
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
    }
    TriMesh::new(vertices, faces).expect("cube generator produces a valid mesh")
}

/// Flat `[0,1]^2` grid in the `z = 0` plane with `2 n^2` faces.
///
/// # Panics
/// If `n == 0`.
pub fn plane(n: usize) -> TriMesh {
    assert!(n >= 1, "plane needs at least one cell per side");
    let stride = n + 1;
    let vertices = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| Point3::new(i as f64 / n as f64, j as f64 / n as f64, 0.0)))
        .collect();
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = j * stride + i;
            let (b, c, d) = (a + 1, a + stride + 1, a + stride);
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, faces).expect("plane generator produces a valid mesh")
}

fn base_icosahedron() -> (Vec<Point3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let s = (1.0 + t * t).sqrt();
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let vertices = raw.iter().map(|&(x, y, z)| Point3::new(x / s, y / s, z / s)).collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

fn midpoint_split(
    vertices: &mut Vec<Point3<f64>>,
    faces: &[[usize; 3]],
    project: bool,
) -> Vec<[usize; 3]> {
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point3<f64>>| {
        *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let mut m: Vector3<f64> = (vertices[a].coords + vertices[b].coords) / 2.0;
            if project {
                m = m.normalize();
            }
            vertices.push(Point3::from(m));
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let ab = mid(a, b, vertices);
        let bc = mid(b, c, vertices);
        let ca = mid(c, a, vertices);
        out.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    out
}

/// Unit-circumradius icosahedron with `levels` rounds of planar midpoint
/// subdivision: `20 * 4^levels` faces on 20 flat facets.
pub fn icosahedron(levels: u32) -> TriMesh {
    let (mut vertices, mut faces) = base_icosahedron();
    for _ in 0..levels {
        faces = midpoint_split(&mut vertices, &faces, false);
    }
    TriMesh::new(vertices, faces).expect("icosahedron generator produces a valid mesh")
}

/// Unit icosphere: midpoint subdivision with projection onto the sphere.
/// `levels = 5` gives 10242 vertices.
pub fn icosphere(levels: u32) -> TriMesh {
    let (mut vertices, mut faces) = base_icosahedron();
    for _ in 0..levels {
        faces = midpoint_split(&mut vertices, &faces, true);
    }
    TriMesh::new(vertices, faces).expect("icosphere generator produces a valid mesh")
}
