//! Shared inputs for the criterion benchmarks.

use clustermesh::{fixtures, noise, TriMesh};

/// Subdivided unit cube corrupted along vertex normals.
pub fn noisy_cube(subdiv: usize, sigma_factor: f64, seed: u64) -> (TriMesh, TriMesh) {
    let clean = fixtures::cube(subdiv);
    let noisy = noise::add_noise(&clean, &noise::NoiseSpec::new(sigma_factor, seed)).expect("non-empty fixture");
    (clean, noisy)
}
