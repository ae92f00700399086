//! Synthetic Gaussian corruption of clean meshes.
//!
//! Noise for vertex `i` is drawn from a ChaCha8 generator seeded with the
//! user seed and positioned on stream `i`, so the output depends only on
//! `(seed, i)` and never on evaluation order or thread count.

use nalgebra::{Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{MeshError, MeshResult};
use crate::mesh::{Topology, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// Displace each vertex along its area-weighted normal.
    #[default]
    AlongNormal,
    /// Perturb each coordinate independently.
    Isotropic,
}

impl std::str::FromStr for NoiseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" | "along-normal" => Ok(NoiseMode::AlongNormal),
            "isotropic" => Ok(NoiseMode::Isotropic),
            other => Err(format!("unknown noise mode {other:?} (expected normal|isotropic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation as a multiple of the mean edge length.
    pub sigma_factor: f64,
    pub mode: NoiseMode,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_factor: f64, seed: u64) -> Self {
        Self {
            sigma_factor,
            mode: NoiseMode::AlongNormal,
            seed,
        }
    }
}

fn vertex_rng(seed: u64, vertex: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(vertex as u64);
    rng
}

/// Adds zero-mean Gaussian noise with std `sigma_factor * mean_edge_length`.
pub fn add_noise(mesh: &TriMesh, spec: &NoiseSpec) -> MeshResult<TriMesh> {
    if mesh.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    if !(spec.sigma_factor >= 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "sigma_factor must be non-negative, got {}",
            spec.sigma_factor
        )));
    }
    if spec.sigma_factor == 0.0 {
        return Ok(mesh.clone());
    }
    let topo = Topology::build(mesh)?;
    let sigma = spec.sigma_factor * topo.mean_edge_length;
    let normals = match spec.mode {
        NoiseMode::AlongNormal => mesh.vertex_normals(),
        NoiseMode::Isotropic => Vec::new(),
    };
    let vertices: Vec<Point3<f64>> = mesh
        .vertices()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = vertex_rng(spec.seed, i);
            let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
            let offset = match spec.mode {
                NoiseMode::AlongNormal => normals[i] * (sigma * draw()),
                NoiseMode::Isotropic => Vector3::new(draw(), draw(), draw()) * sigma,
            };
            p + offset
        })
        .collect();
    Ok(mesh.with_vertices(vertices))
}
