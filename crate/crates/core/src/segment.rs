//! Region-growing segmentation over the edge-operator field and small-cluster
//! refinement.
//!
//! Growth crosses an edge only when its operator norm is strictly below the
//! threshold, so clusters are the connected components of the passing-edge
//! graph. Refinement then folds clusters smaller than `min_cluster_size` into
//! neighbouring large clusters, choosing the label whose faces in a small
//! face ring are most aligned with the face normal.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use crate::edgeop::EdgeOperatorField;
use crate::error::{MeshError, MeshResult};
use crate::mesh::{FaceGeometry, Topology, TriMesh};
use crate::prefilter::{prefilter, PrefilterParams};

/// Per-face cluster assignment with contiguous labels `0..cluster_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    pub label: Vec<usize>,
    pub cluster_count: usize,
    pub cluster_sizes: Vec<usize>,
}

impl ClusterLabels {
    /// Wraps raw labels as given; `cluster_count` is `max + 1`.
    pub fn from_raw(label: Vec<usize>) -> Self {
        let cluster_count = label.iter().max().map_or(0, |m| m + 1);
        let mut cluster_sizes = vec![0; cluster_count];
        for &l in &label {
            cluster_sizes[l] += 1;
        }
        Self {
            label,
            cluster_count,
            cluster_sizes,
        }
    }

    /// Every face in cluster 0.
    pub fn single(face_count: usize) -> Self {
        Self::from_raw(vec![0; face_count])
    }

    /// Renumbers labels in order of first appearance by face id.
    pub fn compacted(label: Vec<usize>) -> Self {
        let mut map = BTreeMap::new();
        let mut next = 0;
        let label = label
            .into_iter()
            .map(|l| {
                *map.entry(l).or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        Self::from_raw(label)
    }

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    /// Faces of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (f, &l) in self.label.iter().enumerate() {
            out[l].push(f);
        }
        out
    }

    /// True when every label's faces form one edge-connected set.
    pub fn is_edge_connected(&self, topo: &Topology) -> bool {
        let comps = label_components(topo, &self.label);
        let mut seen = vec![false; self.cluster_count];
        for comp in comps {
            let l = self.label[comp[0]];
            if seen[l] {
                return false;
            }
            seen[l] = true;
        }
        true
    }
}

/// Which edge predicate drives region growing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BaselineMode {
    /// Edge-operator norm below `d_thr`.
    #[default]
    EdgeOperator,
    /// Dihedral angle between face normals below the given degrees.
    NormalAngle { max_angle_deg: f64 },
    /// No segmentation: one cluster per connected component.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentParams {
    /// Edge-operator norm threshold, in model length units.
    pub d_thr: f64,
    pub min_cluster_size: usize,
    pub refine: bool,
    /// Face-ring depth used when scoring refinement candidates.
    pub ring_depth: usize,
    pub baseline: BaselineMode,
    /// Segment a pre-filtered copy; labels still index the input faces.
    pub prefilter: Option<PrefilterParams>,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            d_thr: 0.002,
            min_cluster_size: 50,
            refine: true,
            ring_depth: 2,
            baseline: BaselineMode::EdgeOperator,
            prefilter: None,
        }
    }
}

impl SegmentParams {
    pub fn with_threshold(d_thr: f64) -> Self {
        Self {
            d_thr,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> MeshResult<()> {
        if !(self.d_thr >= 0.0) || self.min_cluster_size < 1 || self.ring_depth < 1 {
            return Err(MeshError::InvalidParameter(format!(
                "segmentation needs d_thr >= 0, min_cluster_size >= 1, ring_depth >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Grows clusters across every edge for which `passes(edge)` holds, seeding
/// each new cluster at the lowest unlabeled face.
pub fn grow_by(topo: &Topology, passes: impl Fn(usize) -> bool) -> ClusterLabels {
    let n = topo.face_edges.len();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if label[seed] != usize::MAX {
            continue;
        }
        label[seed] = next;
        queue.push_back(seed);
        while let Some(f) = queue.pop_front() {
            for &e in &topo.face_edges[f] {
                if !passes(e) {
                    continue;
                }
                for &g in &topo.edge_faces[e] {
                    if label[g] == usize::MAX {
                        label[g] = next;
                        queue.push_back(g);
                    }
                }
            }
        }
        next += 1;
    }
    ClusterLabels::from_raw(label)
}

/// Region growing on `||D(e)|| < d_thr`.
pub fn region_grow(topo: &Topology, field: &EdgeOperatorField, d_thr: f64) -> ClusterLabels {
    grow_by(topo, |e| field.norms[e] < d_thr)
}

/// Baseline growth on the dihedral angle between face normals.
pub fn region_grow_normal_angle(topo: &Topology, geometry: &FaceGeometry, max_angle_deg: f64) -> ClusterLabels {
    let cos_limit = max_angle_deg.to_radians().cos();
    grow_by(topo, |e| match topo.edge_faces[e][..] {
        [a, b] => geometry.normals[a].dot(&geometry.normals[b]) > cos_limit,
        _ => false,
    })
}

/// Connected components of the "same label" edge graph, each sorted, in order
/// of their lowest face.
fn label_components(topo: &Topology, label: &[usize]) -> Vec<Vec<usize>> {
    let n = label.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if comp[seed] != usize::MAX {
            continue;
        }
        let id = out.len();
        comp[seed] = id;
        queue.push_back(seed);
        let mut members = vec![seed];
        while let Some(f) = queue.pop_front() {
            for &g in &topo.face_adjacent[f] {
                if comp[g] == usize::MAX && label[g] == label[seed] {
                    comp[g] = id;
                    queue.push_back(g);
                    members.push(g);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Argmax over labels of summed scores; ties go to the lower label.
fn best_label(scores: &BTreeMap<usize, f64>) -> Option<usize> {
    scores
        .iter()
        .fold(None, |best: Option<(usize, f64)>, (&l, &s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((l, s)),
        })
        .map(|(l, _)| l)
}

/// Reassigns faces of clusters smaller than `min_cluster_size`.
///
/// All scores are read from the incoming label map. Faces whose mesh
/// component holds no large cluster are merged into the largest cluster of
/// that component. The result is compacted and every cluster is
/// edge-connected and contains at least one originally large cluster (or is
/// such a fallback merge).
pub fn refine(topo: &Topology, geometry: &FaceGeometry, labels: &ClusterLabels, params: &SegmentParams) -> ClusterLabels {
    let n = labels.len();
    let snapshot = &labels.label;
    let is_large: Vec<bool> = labels.cluster_sizes.iter().map(|&s| s >= params.min_cluster_size).collect();
    if is_large.iter().all(|&b| b) {
        return labels.clone();
    }

    // mesh components (label-agnostic) and their fallback label
    let components = label_components(topo, &vec![0; n]);
    let mut component_of = vec![0; n];
    let mut fallback_label = Vec::with_capacity(components.len());
    let mut component_has_large = Vec::with_capacity(components.len());
    for (ci, comp) in components.iter().enumerate() {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &f in comp {
            component_of[f] = ci;
            *counts.entry(snapshot[f]).or_default() += 1;
        }
        let (best, _) = counts
            .iter()
            .fold((usize::MAX, 0), |(bl, bc), (&l, &c)| if c > bc { (l, c) } else { (bl, bc) });
        fallback_label.push(best);
        component_has_large.push(counts.keys().any(|&l| is_large[l]));
    }

    let small_faces: Vec<usize> = (0..n).filter(|&f| !is_large[snapshot[f]]).collect();
    let assignments: Vec<(usize, usize)> = small_faces
        .par_iter()
        .map(|&f| {
            if !component_has_large[component_of[f]] {
                return (f, fallback_label[component_of[f]]);
            }
            let mut depth = params.ring_depth;
            let mut last_len = usize::MAX;
            loop {
                let ring = topo.face_ring(f, depth);
                let mut scores: BTreeMap<usize, f64> = BTreeMap::new();
                for &j in &ring {
                    let l = snapshot[j];
                    if is_large[l] {
                        *scores.entry(l).or_default() += geometry.normals[f].dot(&geometry.normals[j]);
                    }
                }
                if let Some(l) = best_label(&scores) {
                    return (f, l);
                }
                if ring.len() == last_len {
                    // unreachable when the component holds a large cluster
                    return (f, fallback_label[component_of[f]]);
                }
                last_len = ring.len();
                depth += 1;
            }
        })
        .collect();

    let mut label = snapshot.clone();
    for (f, l) in assignments {
        label[f] = l;
    }

    // A face may have joined a label it does not touch; fold such detached
    // pieces into an adjacent anchored cluster.
    let anchored_face = |f: usize| is_large[snapshot[f]] || !component_has_large[component_of[f]];
    loop {
        let comps = label_components(topo, &label);
        let mut comp_id = vec![0; n];
        for (ci, c) in comps.iter().enumerate() {
            for &f in c {
                comp_id[f] = ci;
            }
        }
        let anchored: Vec<bool> = comps.iter().map(|c| c.iter().any(|&f| anchored_face(f))).collect();
        if anchored.iter().all(|&a| a) {
            break;
        }
        let mut changed = false;
        for (ci, c) in comps.iter().enumerate() {
            if anchored[ci] {
                continue;
            }
            let mut scores: BTreeMap<usize, f64> = BTreeMap::new();
            for &f in c {
                for &g in &topo.face_adjacent[f] {
                    if comp_id[g] != ci && anchored[comp_id[g]] {
                        *scores.entry(label[g]).or_default() += geometry.normals[f].dot(&geometry.normals[g]);
                    }
                }
            }
            if let Some(l) = best_label(&scores) {
                for &f in c {
                    label[f] = l;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    ClusterLabels::compacted(label)
}

/// Segments `mesh` (optionally through a pre-filtered copy) and refines.
pub fn segment(mesh: &TriMesh, params: &SegmentParams) -> MeshResult<ClusterLabels> {
    params.validate()?;
    let filtered;
    let work = match &params.prefilter {
        Some(p) => {
            filtered = prefilter(mesh, p)?;
            &filtered
        }
        None => mesh,
    };
    let topo = Topology::build(work)?;
    let geometry = FaceGeometry::compute(work)?;
    let labels = match params.baseline {
        BaselineMode::EdgeOperator => {
            let field = EdgeOperatorField::compute(work, &topo)?;
            region_grow(&topo, &field, params.d_thr)
        }
        BaselineMode::NormalAngle { max_angle_deg } => region_grow_normal_angle(&topo, &geometry, max_angle_deg),
        BaselineMode::None => grow_by(&topo, |_| true),
    };
    Ok(if params.refine {
        refine(&topo, &geometry, &labels, params)
    } else {
        labels
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::noise::{add_noise, NoiseSpec};

    fn field_of(mesh: &TriMesh) -> (Topology, EdgeOperatorField) {
        let topo = Topology::build(mesh).unwrap();
        let field = EdgeOperatorField::compute(mesh, &topo).unwrap();
        (topo, field)
    }

    fn is_partition(l: &ClusterLabels) -> bool {
        l.cluster_sizes.iter().sum::<usize>() == l.len()
            && l.label.iter().all(|&x| x < l.cluster_count)
            && l.cluster_sizes.iter().all(|&s| s > 0)
    }

    #[test]
    fn threshold_limits() {
        let cube = fixtures::cube(4);
        let (topo, field) = field_of(&cube);
        assert_eq!(region_grow(&topo, &field, f64::INFINITY).cluster_count, 1);
        let all = region_grow(&topo, &field, 0.0);
        assert_eq!(all.cluster_count, cube.face_count());
        // infinity does not pass boundary edges (norm +inf, strict <)
        let plane = fixtures::plane(3);
        let (topo, field) = field_of(&plane);
        assert_eq!(region_grow(&topo, &field, f64::INFINITY).cluster_count, 1);
    }

    #[test]
    fn clean_cube_has_six_sides() {
        let cube = fixtures::cube(10);
        let (topo, field) = field_of(&cube);
        let labels = region_grow(&topo, &field, 1e-6 * topo.mean_edge_length);
        assert_eq!(labels.cluster_count, 6);
        assert!(labels.cluster_sizes.iter().all(|&s| s == 200));
        assert!(labels.is_edge_connected(&topo));
        assert!(is_partition(&labels));
    }

    #[test]
    fn clean_icosahedron_has_twenty_facets() {
        let ico = fixtures::icosahedron(3);
        let labels = segment(&ico, &SegmentParams::with_threshold(1e-9)).unwrap();
        assert_eq!(labels.cluster_count, 20);
    }

    #[test]
    fn normal_angle_baseline_finds_cube_sides() {
        let cube = fixtures::cube(6);
        let params = SegmentParams {
            baseline: BaselineMode::NormalAngle { max_angle_deg: 30.0 },
            ..Default::default()
        };
        assert_eq!(segment(&cube, &params).unwrap().cluster_count, 6);
    }

    #[test]
    fn refine_leaves_large_clusters_alone() {
        let cube = fixtures::cube(10);
        let (topo, field) = field_of(&cube);
        let geom = FaceGeometry::compute(&cube).unwrap();
        let labels = region_grow(&topo, &field, 1e-9);
        assert_eq!(refine(&topo, &geom, &labels, &SegmentParams::default()), labels);
    }

    #[test]
    fn sliver_is_absorbed() {
        let plane = fixtures::plane(16);
        let topo = Topology::build(&plane).unwrap();
        let geom = FaceGeometry::compute(&plane).unwrap();
        let center = (0..plane.face_count())
            .find(|&f| {
                let c = geom.centroids[f];
                (c.x - 0.5).abs() < 0.04 && (c.y - 0.5).abs() < 0.04
            })
            .unwrap();
        let mut raw = vec![0; plane.face_count()];
        let sliver: Vec<usize> = std::iter::once(center).chain(topo.face_adjacent[center].iter().copied().take(2)).collect();
        for &f in &sliver {
            raw[f] = 1;
        }
        let labels = ClusterLabels::from_raw(raw);
        assert_eq!(labels.cluster_sizes, vec![512 - 3, 3]);
        let out = refine(&topo, &geom, &labels, &SegmentParams::default());
        assert_eq!(out.cluster_count, 1);
    }

    #[test]
    fn all_small_falls_back_to_one_cluster() {
        let cube = fixtures::cube(1);
        let (topo, field) = field_of(&cube);
        let geom = FaceGeometry::compute(&cube).unwrap();
        let labels = region_grow(&topo, &field, 1e-9);
        assert_eq!(labels.cluster_count, 6);
        let out = refine(&topo, &geom, &labels, &SegmentParams::default());
        assert_eq!(out.cluster_count, 1);
        assert_eq!(out.cluster_sizes, vec![12]);
    }

    #[test]
    fn refined_noisy_cube_keeps_only_large_clusters() {
        let clean = fixtures::cube(16);
        let noisy = add_noise(&clean, &NoiseSpec::new(0.5, 17)).unwrap();
        let work = crate::prefilter::prefilter(&noisy, &PrefilterParams::heavy_noise()).unwrap();
        let (topo, field) = field_of(&work);
        let geom = FaceGeometry::compute(&work).unwrap();
        let params = SegmentParams::with_threshold(0.05 * topo.mean_edge_length);
        let raw = region_grow(&topo, &field, params.d_thr);
        assert!(raw.cluster_sizes.iter().any(|&s| s < 50), "fixture should produce small clusters");
        let out = refine(&topo, &geom, &raw, &params);
        assert!(is_partition(&out));
        assert!(out.is_edge_connected(&topo));
        assert_eq!(out.cluster_count, 6);
        for members in out.members() {
            assert!(members.iter().any(|&f| raw.cluster_sizes[raw.label[f]] >= 50));
        }
    }

    #[test]
    fn prefiltered_moderate_noise_gives_six_clusters() {
        let clean = fixtures::cube(10);
        for seed in [1, 2, 3] {
            let noisy = add_noise(&clean, &NoiseSpec::new(0.2, seed)).unwrap();
            let params = SegmentParams {
                prefilter: Some(PrefilterParams::heavy_noise()),
                ..SegmentParams::with_threshold(0.002)
            };
            let l = segment(&noisy, &params).unwrap();
            assert_eq!(l.cluster_count, 6, "seed {seed}");
            assert!(l.cluster_sizes.iter().all(|&s| s >= 50));
        }
    }

    #[test]
    fn coarsening_is_monotone() {
        let clean = fixtures::cube(8);
        let noisy = add_noise(&clean, &NoiseSpec::new(0.2, 3)).unwrap();
        let (topo, field) = field_of(&noisy);
        let grid = [1e-6, 1e-3, 1e-2, 3e-2, 1e-1, 1.0, f64::INFINITY];
        let parts: Vec<ClusterLabels> = grid.iter().map(|&t| region_grow(&topo, &field, t)).collect();
        for w in parts.windows(2) {
            let mut map = vec![usize::MAX; w[0].cluster_count];
            for (f, &fine) in w[0].label.iter().enumerate() {
                let coarse = w[1].label[f];
                assert!(map[fine] == usize::MAX || map[fine] == coarse);
                map[fine] = coarse;
            }
        }
    }

    #[test]
    fn compaction_orders_by_first_face() {
        let l = ClusterLabels::compacted(vec![7, 7, 3, 9, 3]);
        assert_eq!(l.label, vec![0, 0, 1, 2, 1]);
        assert_eq!(l.cluster_sizes, vec![2, 2, 1]);
    }
}
