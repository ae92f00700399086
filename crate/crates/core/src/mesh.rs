//! Indexed triangle mesh, derived face geometry and adjacency queries.
//!
//! Everything here is immutable after construction. [`Topology`] holds the
//! edge table and the face/vertex incidence lists that every other module
//! walks; [`FaceGeometry`] caches per-face normals, centroids and areas.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use nalgebra::{Point3, Vector3};

use crate::error::{MeshError, MeshResult};

/// Indexed triangle mesh with counter-clockwise faces.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Builds a mesh, checking index range and rejecting faces with a
    /// repeated vertex.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> MeshResult<Self> {
        let vertex_count = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &index in f {
                if index >= vertex_count {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        index,
                        vertex_count,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face: fi });
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Same connectivity, new positions.
    ///
    /// # Panics
    /// If `vertices.len()` differs from the current vertex count.
    pub fn with_vertices(&self, vertices: Vec<Point3<f64>>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len(), "vertex count changed");
        Self {
            vertices,
            faces: self.faces.clone(),
        }
    }

    /// Applies `f` to every vertex position.
    pub fn map_vertices(&self, f: impl Fn(&Point3<f64>) -> Point3<f64>) -> Self {
        self.with_vertices(self.vertices.iter().map(f).collect())
    }

    pub fn face_points(&self, face: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Length of the axis-aligned bounding box diagonal (0 for an empty mesh).
    pub fn bbox_diagonal(&self) -> f64 {
        let Some(first) = self.vertices.first() else {
            return 0.0;
        };
        let (mut lo, mut hi) = (*first, *first);
        for p in &self.vertices {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// True when both meshes share vertex count and face index triples.
    pub fn same_connectivity(&self, other: &TriMesh) -> bool {
        self.vertices.len() == other.vertices.len() && self.faces == other.faces
    }

    /// Area-weighted vertex normals. Vertices without incident faces get zero.
    pub fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        let mut acc = vec![Vector3::zeros(); self.vertices.len()];
        for f in &self.faces {
            let [a, b, c] = f.map(|i| self.vertices[i]);
            let n = (b - a).cross(&(c - a));
            for &i in f {
                acc[i] += n;
            }
        }
        for n in &mut acc {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        acc
    }
}

/// Edge table and incidence lists derived from a [`TriMesh`].
#[derive(Debug, Clone)]
pub struct Topology {
    /// Unordered vertex pairs stored as `[lo, hi]`, in order of first appearance.
    pub edges: Vec<[usize; 2]>,
    /// Incident faces per edge, ascending. One entry for boundary edges.
    pub edge_faces: Vec<Vec<usize>>,
    /// The three edges of each face; `face_edges[f][k]` joins corners `k` and `k+1`.
    pub face_edges: Vec<[usize; 3]>,
    /// Edge-connected faces, ascending, at most three.
    pub face_adjacent: Vec<Vec<usize>>,
    /// Faces incident to each vertex, ascending.
    pub vertex_faces: Vec<Vec<usize>>,
    pub mean_edge_length: f64,
}

impl Topology {
    pub fn build(mesh: &TriMesh) -> MeshResult<Self> {
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(mesh.face_count() * 3 / 2);
        let mut edges = Vec::new();
        let mut edge_faces: Vec<Vec<usize>> = Vec::new();
        let mut face_edges = Vec::with_capacity(mesh.face_count());
        let mut vertex_faces = vec![Vec::new(); mesh.vertex_count()];

        for (fi, f) in mesh.faces().iter().enumerate() {
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face: fi });
            }
            let mut fe = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_faces.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                edge_faces[id].push(fi);
                if edge_faces[id].len() > 2 {
                    return Err(MeshError::NonManifoldEdge {
                        v0: key[0],
                        v1: key[1],
                        count: edge_faces[id].len(),
                    });
                }
                fe[k] = id;
                vertex_faces[f[k]].push(fi);
            }
            face_edges.push(fe);
        }

        let mut face_adjacent = vec![Vec::with_capacity(3); mesh.face_count()];
        for faces in &edge_faces {
            if let [a, b] = faces[..] {
                face_adjacent[a].push(b);
                face_adjacent[b].push(a);
            }
        }
        for adj in &mut face_adjacent {
            adj.sort_unstable();
        }

        let verts = mesh.vertices();
        let mean_edge_length = if edges.is_empty() {
            0.0
        } else {
            edges.iter().map(|[a, b]| (verts[*b] - verts[*a]).norm()).sum::<f64>() / edges.len() as f64
        };

        Ok(Self {
            edges,
            edge_faces,
            face_edges,
            face_adjacent,
            vertex_faces,
            mean_edge_length,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary(&self, edge: usize) -> bool {
        self.edge_faces[edge].len() < 2
    }

    /// Faces reachable from `face` in at most `depth` edge-adjacency steps,
    /// excluding `face` itself. Sorted ascending.
    pub fn face_ring(&self, face: usize, depth: usize) -> Vec<usize> {
        let mut seen = HashMap::new();
        seen.insert(face, 0usize);
        let mut queue = VecDeque::from([face]);
        while let Some(f) = queue.pop_front() {
            let d = seen[&f];
            if d == depth {
                continue;
            }
            for &g in &self.face_adjacent[f] {
                if let Entry::Vacant(e) = seen.entry(g) {
                    e.insert(d + 1);
                    queue.push_back(g);
                }
            }
        }
        let mut out: Vec<usize> = seen.into_keys().filter(|&f| f != face).collect();
        out.sort_unstable();
        out
    }
}

/// Per-face unit normals, centroids and areas.
#[derive(Debug, Clone)]
pub struct FaceGeometry {
    pub normals: Vec<Vector3<f64>>,
    pub centroids: Vec<Point3<f64>>,
    pub areas: Vec<f64>,
}

impl FaceGeometry {
    pub fn compute(mesh: &TriMesh) -> MeshResult<Self> {
        let n = mesh.face_count();
        let mut normals = Vec::with_capacity(n);
        let mut centroids = Vec::with_capacity(n);
        let mut areas = Vec::with_capacity(n);
        for fi in 0..n {
            let [a, b, c] = mesh.face_points(fi);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            if !(len > 0.0) || !len.is_finite() {
                return Err(MeshError::ZeroAreaFace { face: fi });
            }
            normals.push(cross / len);
            areas.push(0.5 * len);
            centroids.push(Point3::from((a.coords + b.coords + c.coords) / 3.0));
        }
        Ok(Self {
            normals,
            centroids,
            areas,
        })
    }

    /// Mean distance between centroids of edge-adjacent faces; the default
    /// spatial bandwidth of the bilateral-type filters.
    pub fn mean_adjacent_centroid_distance(&self, topo: &Topology) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for faces in &topo.edge_faces {
            if let [a, b] = faces[..] {
                sum += (self.centroids[a] - self.centroids[b]).norm();
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// The two triangles sharing an interior edge.
///
/// `p1`/`p3` are the shared edge endpoints (lower vertex index first), `p2`
/// is the apex of `faces.0` (the lower face id) and `p4` the apex of `faces.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flap {
    pub p1: Point3<f64>,
    pub p2: Point3<f64>,
    pub p3: Point3<f64>,
    pub p4: Point3<f64>,
    pub faces: (usize, usize),
    /// Vertex indices in `p1, p2, p3, p4` order.
    pub vertices: [usize; 4],
}

impl Flap {
    pub fn from_points(p1: Point3<f64>, p2: Point3<f64>, p3: Point3<f64>, p4: Point3<f64>) -> Self {
        Self {
            p1,
            p2,
            p3,
            p4,
            faces: (0, 0),
            vertices: [0, 1, 2, 3],
        }
    }

    /// Swaps the roles of the two triangles (`p2 <-> p4`, `p1 <-> p3`).
    pub fn swapped(&self) -> Self {
        Self {
            p1: self.p3,
            p2: self.p4,
            p3: self.p1,
            p4: self.p2,
            faces: (self.faces.1, self.faces.0),
            vertices: [self.vertices[2], self.vertices[3], self.vertices[0], self.vertices[1]],
        }
    }

    pub fn area_123(&self) -> f64 {
        0.5 * (self.p2 - self.p1).cross(&(self.p3 - self.p1)).norm()
    }

    pub fn area_134(&self) -> f64 {
        0.5 * (self.p3 - self.p1).cross(&(self.p4 - self.p1)).norm()
    }
}

fn apex(face: &[usize; 3], edge: [usize; 2]) -> usize {
    *face
        .iter()
        .find(|&&v| v != edge[0] && v != edge[1])
        .expect("triangle has a vertex off its own edge")
}

/// Flap of an interior edge. `faces.0` is the lower face id.
pub fn flap_of_edge(mesh: &TriMesh, topo: &Topology, edge: usize) -> MeshResult<Flap> {
    let [fa, fb] = topo.edge_faces[edge][..] else {
        return Err(MeshError::BoundaryEdge { edge });
    };
    let e = topo.edges[edge];
    let faces = mesh.faces();
    let (i2, i4) = (apex(&faces[fa], e), apex(&faces[fb], e));
    let v = mesh.vertices();
    Ok(Flap {
        p1: v[e[0]],
        p2: v[i2],
        p3: v[e[1]],
        p4: v[i4],
        faces: (fa, fb),
        vertices: [e[0], i2, e[1], i4],
    })
}

/// Spatial hash over face centroids for fixed-radius queries.
#[derive(Debug, Clone)]
pub struct CentroidIndex<'a> {
    centroids: &'a [Point3<f64>],
    radius: f64,
    cells: Option<HashMap<[i64; 3], Vec<usize>>>,
}

impl<'a> CentroidIndex<'a> {
    pub fn new(centroids: &'a [Point3<f64>], radius: f64) -> Self {
        // Unbounded or very small radii degrade to a linear scan.
        let usable = radius.is_finite() && radius > 0.0 && {
            let extent = centroids
                .iter()
                .fold(0.0f64, |m, c| m.max(c.coords.amax()));
            extent / radius < 1e6
        };
        let cells = usable.then(|| {
            let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
            for (i, c) in centroids.iter().enumerate() {
                cells.entry(cell_of(c, radius)).or_default().push(i);
            }
            cells
        });
        Self {
            centroids,
            radius,
            cells,
        }
    }

    /// Faces whose centroid lies within the radius of `face`'s centroid,
    /// excluding `face`. Sorted ascending.
    pub fn query(&self, face: usize) -> Vec<usize> {
        let c = self.centroids[face];
        let r2 = self.radius * self.radius;
        let within = |j: usize| j != face && (self.radius.is_infinite() || (self.centroids[j] - c).norm_squared() <= r2);
        let mut out: Vec<usize> = match &self.cells {
            None => (0..self.centroids.len()).filter(|&j| within(j)).collect(),
            Some(cells) => {
                let base = cell_of(&c, self.radius);
                let mut out = Vec::new();
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(bucket) = cells.get(&[base[0] + dx, base[1] + dy, base[2] + dz]) {
                                out.extend(bucket.iter().copied().filter(|&j| within(j)));
                            }
                        }
                    }
                }
                out
            }
        };
        out.sort_unstable();
        out
    }
}

fn cell_of(p: &Point3<f64>, size: f64) -> [i64; 3] {
    [
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    ]
}

/// Faces whose centroid lies within `r * mean_edge_length` of `face`'s centroid.
pub fn geometric_neighborhood(geometry: &FaceGeometry, topo: &Topology, face: usize, r: f64) -> Vec<usize> {
    CentroidIndex::new(&geometry.centroids, r * topo.mean_edge_length).query(face)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn lone_triangle() -> TriMesh {
        TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_faces() {
        let v = vec![Point3::origin(); 3];
        assert!(matches!(
            TriMesh::new(v.clone(), vec![[0, 1, 3]]),
            Err(MeshError::IndexOutOfRange { index: 3, .. })
        ));
        assert!(matches!(
            TriMesh::new(v, vec![[0, 1, 1]]),
            Err(MeshError::DegenerateFace { face: 0 })
        ));
    }

    #[test]
    fn cube_topology_counts() {
        let cube = fixtures::cube(1);
        let topo = Topology::build(&cube).unwrap();
        assert_eq!(cube.face_count(), 12);
        assert_eq!(topo.edge_count(), 18);
        assert!(topo.edge_faces.iter().all(|f| f.len() == 2));
        assert!(topo.face_adjacent.iter().all(|a| a.len() == 3));
        let expected = (12.0 + 6.0 * 2f64.sqrt()) / 18.0;
        assert!((topo.mean_edge_length - expected).abs() < 1e-12);
        assert!((topo.mean_edge_length - 1.13807).abs() < 1e-5);
    }

    #[test]
    fn lone_triangle_has_three_boundary_edges() {
        let topo = Topology::build(&lone_triangle()).unwrap();
        assert_eq!(topo.edge_count(), 3);
        assert!((0..3).all(|e| topo.is_boundary(e)));
        assert!(topo.face_ring(0, 1).is_empty());
        assert!(matches!(
            flap_of_edge(&lone_triangle(), &topo, 0),
            Err(MeshError::BoundaryEdge { edge: 0 })
        ));
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let mesh = TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap();
        assert!(matches!(
            Topology::build(&mesh),
            Err(MeshError::NonManifoldEdge { v0: 0, v1: 1, count: 3 })
        ));
    }

    #[test]
    fn face_geometry_of_unit_triangle() {
        let g = FaceGeometry::compute(&lone_triangle()).unwrap();
        assert!((g.normals[0] - Vector3::z()).norm() < 1e-15);
        assert!((g.areas[0] - 0.5).abs() < 1e-15);
        assert!((g.centroids[0] - Point3::new(1.0 / 3.0, 1.0 / 3.0, 0.0)).norm() < 1e-15);

        let flipped = TriMesh::new(lone_triangle().vertices().to_vec(), vec![[0, 2, 1]]).unwrap();
        let g = FaceGeometry::compute(&flipped).unwrap();
        assert!((g.normals[0] + Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn equilateral_area() {
        let s = 2.5;
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(s, 0.0, 0.0),
                Point3::new(s / 2.0, s * 3f64.sqrt() / 2.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let g = FaceGeometry::compute(&mesh).unwrap();
        assert!((g.areas[0] - s * s * 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_area_face_is_an_error() {
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(2.0, 0.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(FaceGeometry::compute(&mesh), Err(MeshError::ZeroAreaFace { face: 0 })));
    }

    #[test]
    fn cube_flaps() {
        let cube = fixtures::cube(1);
        let topo = Topology::build(&cube).unwrap();
        let mut coplanar = 0;
        let mut crease = 0;
        for e in 0..topo.edge_count() {
            let flap = flap_of_edge(&cube, &topo, e).unwrap();
            assert!(flap.faces.0 < flap.faces.1);
            assert!(flap.vertices[0] < flap.vertices[2]);
            let na = (flap.p2 - flap.p1).cross(&(flap.p3 - flap.p1)).normalize();
            let nb = (flap.p3 - flap.p1).cross(&(flap.p4 - flap.p1)).normalize();
            // both flap triangles should face the same side of the shared edge
            let angle = na.dot(&nb).clamp(-1.0, 1.0).acos().abs();
            if angle < 1e-12 {
                coplanar += 1;
            } else {
                assert!((angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "angle {angle}");
                crease += 1;
            }
        }
        assert_eq!(coplanar, 6);
        assert_eq!(crease, 12);
    }

    fn bfs_oracle(topo: &Topology, seed: usize, k: usize) -> Vec<usize> {
        // Layer-by-layer expansion using plain vectors.
        let mut visited = vec![seed];
        let mut frontier = vec![seed];
        for _ in 0..k {
            let mut next = Vec::new();
            for &f in &frontier {
                for &g in &topo.face_adjacent[f] {
                    if !visited.contains(&g) && !next.contains(&g) {
                        next.push(g);
                    }
                }
            }
            visited.extend(&next);
            frontier = next;
        }
        let mut out: Vec<usize> = visited.into_iter().filter(|&f| f != seed).collect();
        out.sort();
        out
    }

    #[test]
    fn face_rings_match_bfs_oracle() {
        let cube = fixtures::cube(1);
        let topo = Topology::build(&cube).unwrap();
        for f in 0..cube.face_count() {
            for k in 1..5 {
                assert_eq!(topo.face_ring(f, k), bfs_oracle(&topo, f, k));
            }
        }
        let plane = fixtures::plane(8);
        let topo = Topology::build(&plane).unwrap();
        let interior = (0..plane.face_count()).find(|&f| topo.face_adjacent[f].len() == 3).unwrap();
        assert_eq!(topo.face_ring(interior, 1).len(), 3);
    }

    #[test]
    fn geometric_neighborhood_limits_and_oracle() {
        let cube = fixtures::cube(4);
        let topo = Topology::build(&cube).unwrap();
        let g = FaceGeometry::compute(&cube).unwrap();
        assert!(geometric_neighborhood(&g, &topo, 0, 1e-9).is_empty());
        assert_eq!(geometric_neighborhood(&g, &topo, 0, f64::INFINITY).len(), cube.face_count() - 1);
        let radius = 2.0 * topo.mean_edge_length;
        let index = CentroidIndex::new(&g.centroids, radius);
        for f in 0..cube.face_count() {
            let brute: Vec<usize> = (0..cube.face_count())
                .filter(|&j| j != f && (g.centroids[j] - g.centroids[f]).norm() <= radius)
                .collect();
            assert_eq!(index.query(f), brute);
        }
    }
}
