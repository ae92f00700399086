//! Cluster-constrained mesh denoising.
//!
//! A noisy triangle mesh is segmented into near-planar clusters by region
//! growing over an area-weighted differential edge operator (optionally after
//! a quadratic pre-filter). The cluster labels then restrict the
//! neighbourhoods of classic two-step denoisers (normal filtering followed by
//! vertex update) so filtering never mixes normals across sharp features.
//!
//! ```
//! use clustermesh::{fixtures, noise, segment, denoise, metrics};
//!
//! let clean = fixtures::cube(6);
//! let noisy = noise::add_noise(&clean, &noise::NoiseSpec::new(0.2, 7)).unwrap();
//! let params = denoise::DenoiseParams::parse(denoise::Method::Bnf, "0.35,20,10").unwrap();
//! let seg = segment::SegmentParams { d_thr: 0.02, min_cluster_size: 20, ..Default::default() };
//! let (out, labels) = denoise::denoise_pipeline(&noisy, &params, Some(&seg)).unwrap();
//! assert!(labels.unwrap().cluster_count >= 1);
//! assert!(metrics::msae(&out, &clean).unwrap() < metrics::msae(&noisy, &clean).unwrap());
//! ```

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvh;
pub mod denoise;
pub mod edgeop;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod noise;
pub mod prefilter;
pub mod segment;
pub mod sparse;

pub use denoise::{denoise, denoise_pipeline, DenoiseParams, Method, NormalField};
pub use edgeop::EdgeOperatorField;
pub use error::{MeshError, MeshResult};
pub use mesh::{FaceGeometry, Flap, Topology, TriMesh};
pub use metrics::MetricsReport;
pub use noise::{NoiseMode, NoiseSpec};
pub use prefilter::PrefilterParams;
pub use segment::{ClusterLabels, SegmentParams};
