//! Axis-aligned bounding volume hierarchy over triangles for nearest-point queries.

use nalgebra::{Point3, Vector3};

use crate::mesh::TriMesh;

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_triangle_distance_squared(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> f64 {
    (closest_point_on_triangle(p, &tri[0], &tri[1], &tri[2]) - p).norm_squared()
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Point3<f64>,
    max: Point3<f64>,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Point3::from(Vector3::repeat(f64::INFINITY)),
            max: Point3::from(Vector3::repeat(f64::NEG_INFINITY)),
        }
    }

    fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn distance_squared(&self, p: &Point3<f64>) -> f64 {
        let d = (self.min - p).sup(&Vector3::zeros()).sup(&(p - self.max));
        d.norm_squared()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

const LEAF_SIZE: usize = 4;

/// Median-split BVH over the faces of a mesh.
#[derive(Debug, Clone)]
pub struct TriangleBvh {
    triangles: Vec<[Point3<f64>; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl TriangleBvh {
    pub fn build(mesh: &TriMesh) -> Self {
        let triangles: Vec<[Point3<f64>; 3]> = (0..mesh.face_count()).map(|f| mesh.face_points(f)).collect();
        let centroids: Vec<Point3<f64>> = triangles
            .iter()
            .map(|t| Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0))
            .collect();
        let mut bvh = Self {
            order: (0..triangles.len()).collect(),
            triangles,
            nodes: Vec::new(),
        };
        if !bvh.triangles.is_empty() {
            bvh.build_node(0, bvh.triangles.len(), &centroids);
        }
        bvh
    }

    fn build_node(&mut self, start: usize, end: usize, centroids: &[Point3<f64>]) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &t in &self.order[start..end] {
            for p in &self.triangles[t] {
                bounds.grow(p);
            }
            cbounds.grow(&centroids[t]);
        }
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        let extent = cbounds.max - cbounds.min;
        let axis = extent.imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis])
        });
        self.nodes.push(Node::Leaf { bounds, start, end }); // placeholder
        let left = self.build_node(start, mid, centroids);
        let right = self.build_node(mid, end, centroids);
        self.nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    /// Squared distance from `p` to the nearest triangle, `+inf` when empty.
    pub fn nearest_distance_squared(&self, p: &Point3<f64>) -> f64 {
        let mut best = f64::INFINITY;
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bounds().distance_squared(p) >= best {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[start..end] {
                        best = best.min(point_triangle_distance_squared(p, &self.triangles[t]));
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left].bounds().distance_squared(p);
                    let dr = self.nodes[right].bounds().distance_squared(p);
                    // visit the nearer child first
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }

    pub fn bounds_diagonal(&self) -> f64 {
        self.nodes.first().map_or(0.0, |n| {
            let b = n.bounds();
            (b.max - b.min).norm()
        })
    }
}
