use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clustermesh::{Method, NoiseMode, PrefilterParams};

#[derive(Debug, Parser)]
#[command(name = "clustermesh", version, about = "Cluster-constrained mesh denoising")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add seeded Gaussian noise to a mesh.
    Noise(NoiseArgs),
    /// Segment a mesh into near-planar clusters.
    Segment(SegmentArgs),
    /// Denoise a mesh, optionally constrained by clusters.
    Denoise(DenoiseArgs),
    /// Compare a result mesh against ground truth.
    Eval(EvalArgs),
    /// Run a parameter sweep described by a config file.
    Bench(BenchArgs),
    /// Write a generated test mesh.
    MakeFixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    pub input: PathBuf,
    /// Noise standard deviation as a multiple of the mean edge length.
    #[arg(long)]
    pub sigma: f64,
    /// `normal` or `isotropic`.
    #[arg(long, default_value = "normal")]
    pub mode: NoiseMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to `<stem>_n<sigma>.obj` next to the input.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PrefilterArgs {
    /// Segment a quadratically pre-filtered copy of the mesh.
    #[arg(long)]
    pub prefilter: bool,
    #[arg(long, default_value_t = PrefilterParams::default().alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = PrefilterParams::default().beta)]
    pub beta: f64,
    #[arg(long, default_value_t = PrefilterParams::default().sigma_w)]
    pub sigma_w: f64,
    /// Extra solves with weights re-frozen from the previous result.
    #[arg(long, default_value_t = 0)]
    pub refreeze: usize,
}

impl PrefilterArgs {
    pub fn params(&self) -> Option<PrefilterParams> {
        self.prefilter.then(|| PrefilterParams {
            alpha: self.alpha,
            beta: self.beta,
            sigma_w: self.sigma_w,
            refreeze: self.refreeze,
            ..Default::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub input: PathBuf,
    /// Edge-operator threshold in model units; `inf` merges everything.
    #[arg(long, default_value_t = 0.002)]
    pub dthr: f64,
    #[arg(long, default_value_t = 50)]
    pub min_cluster: usize,
    #[arg(long)]
    pub no_refine: bool,
    /// Also write `<stem>.norms.csv` with one edge-operator norm per edge.
    #[arg(long)]
    pub dump_norms: bool,
    #[command(flatten)]
    pub prefilter: PrefilterArgs,
    /// Defaults to the input's directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub method: Method,
    /// Comma-separated parameter tuple for the method.
    #[arg(long)]
    pub params: String,
    #[arg(long)]
    pub use_clusters: bool,
    /// Segmentation threshold; only meaningful with `--use-clusters`.
    #[arg(long)]
    pub dthr: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub min_cluster: usize,
    #[command(flatten)]
    pub prefilter: PrefilterArgs,
    /// Corrupt the input with this much noise before denoising.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value = "normal")]
    pub noise_mode: NoiseMode,
    /// Seed for `--noise`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to `<stem>_<method>.obj` (or `_<method>_c.obj` with clusters).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub result: PathBuf,
    pub truth: PathBuf,
    /// Row label; defaults to the result file stem.
    #[arg(long)]
    pub label: Option<String>,
    /// CSV file to append to (header written when new).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub config: PathBuf,
    /// Overrides the config's `output`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Cube,
    Icosahedron,
    Plane,
    Sphere,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    pub shape: Shape,
    #[arg(long, default_value_t = 1)]
    pub subdiv: usize,
    /// Defaults to `<shape><subdiv>.obj` in the working directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
