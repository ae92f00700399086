//! Parameter-sweep harness.
//!
//! A config is a flat `key = value` file; `#` starts a comment. Every
//! `sweep.<method> = <tuple>` line adds one parameter setting, in file order.
//! Each setting runs without and/or with the cluster constraint on one shared
//! noise realization, so plain and constrained rows are paired.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clustermesh::segment::{segment, ClusterLabels, SegmentParams};
use clustermesh::{denoise, io, metrics, noise, DenoiseParams, Method, NoiseMode, NoiseSpec, PrefilterParams, TriMesh};
use rayon::prelude::*;
use tracing::{info, warn};

use crate::args::Shape;
use crate::commands::fixture;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Fixture { shape: Shape, subdiv: usize },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMode {
    Both,
    On,
    Off,
}

impl ClusterMode {
    fn variants(self) -> &'static [bool] {
        match self {
            ClusterMode::Both => &[false, true],
            ClusterMode::On => &[true],
            ClusterMode::Off => &[false],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub model: ModelSource,
    /// `None` benchmarks the model as-is against itself.
    pub noise: Option<NoiseSpec>,
    pub segment: SegmentParams,
    pub clusters: ClusterMode,
    pub sweep: Vec<DenoiseParams>,
    pub output: PathBuf,
    /// Record wall-clock times; off by default so reruns are byte-identical.
    pub timing: bool,
}

fn parse_value<T: std::str::FromStr>(path: &Path, line: usize, key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        line,
        message: format!("bad value {value:?} for {key}: {e}"),
    })
}

impl BenchConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Mesh(clustermesh::MeshError::Io {
            path: path.to_path_buf(),
            source: e,
        }))?;
        Self::parse(&text, path)
    }

    /// Parses config text; relative paths resolve against `origin`'s directory.
    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        let base = origin.parent().unwrap_or(Path::new(""));
        let err = |line: usize, message: String| CliError::Config {
            path: origin.to_path_buf(),
            line,
            message,
        };

        let mut model: Option<String> = None;
        let mut subdiv = 10usize;
        let mut sigma: Option<f64> = None;
        let mut mode = NoiseMode::default();
        let mut seed = 0u64;
        let mut seg = SegmentParams::default();
        let mut use_prefilter = false;
        let mut pre = PrefilterParams::default();
        let mut clusters = ClusterMode::Both;
        let mut sweep = Vec::new();
        let mut output = PathBuf::from("bench_out");
        let mut timing = false;
        let mut seen = HashSet::new();

        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(n, format!("expected `key = value`, got {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some(method) = key.strip_prefix("sweep.") {
                let method: Method = parse_value(origin, n, key, method)?;
                let params = DenoiseParams::parse(method, value).map_err(|e| err(n, e.to_string()))?;
                sweep.push(params);
                continue;
            }
            if !seen.insert(key.to_owned()) {
                return Err(err(n, format!("duplicate key {key}")));
            }
            match key {
                "model" => model = Some(value.to_owned()),
                "subdiv" => subdiv = parse_value(origin, n, key, value)?,
                "noise.sigma" => sigma = Some(parse_value(origin, n, key, value)?),
                "noise.mode" => mode = parse_value(origin, n, key, value)?,
                "seed" => seed = parse_value(origin, n, key, value)?,
                "dthr" => seg.d_thr = parse_value(origin, n, key, value)?,
                "min_cluster" => seg.min_cluster_size = parse_value(origin, n, key, value)?,
                "refine" => seg.refine = parse_value(origin, n, key, value)?,
                "prefilter" => use_prefilter = parse_value(origin, n, key, value)?,
                "prefilter.alpha" => pre.alpha = parse_value(origin, n, key, value)?,
                "prefilter.beta" => pre.beta = parse_value(origin, n, key, value)?,
                "prefilter.sigma_w" => pre.sigma_w = parse_value(origin, n, key, value)?,
                "prefilter.refreeze" => pre.refreeze = parse_value(origin, n, key, value)?,
                "clusters" => {
                    clusters = match value {
                        "both" => ClusterMode::Both,
                        "on" => ClusterMode::On,
                        "off" => ClusterMode::Off,
                        _ => return Err(err(n, format!("clusters must be both|on|off, got {value:?}"))),
                    }
                }
                "output" => output = PathBuf::from(value),
                "timing" => timing = parse_value(origin, n, key, value)?,
                _ => return Err(err(n, format!("unknown key {key}"))),
            }
        }

        let model = model.ok_or_else(|| err(0, "missing `model`".into()))?;
        let model = match model.as_str() {
            "cube" => ModelSource::Fixture { shape: Shape::Cube, subdiv },
            "icosahedron" => ModelSource::Fixture { shape: Shape::Icosahedron, subdiv },
            "plane" => ModelSource::Fixture { shape: Shape::Plane, subdiv },
            "sphere" => ModelSource::Fixture { shape: Shape::Sphere, subdiv },
            file => ModelSource::File(base.join(file)),
        };
        if sweep.is_empty() {
            return Err(CliError::Usage(format!("{}: no sweep.<method> entries", origin.display())));
        }
        seg.prefilter = use_prefilter.then_some(pre);
        seg.validate().map_err(|e| err(0, e.to_string()))?;
        if let Some(p) = &seg.prefilter {
            p.validate().map_err(|e| err(0, e.to_string()))?;
        }
        Ok(Self {
            model,
            noise: sigma.map(|sigma_factor| NoiseSpec { sigma_factor, mode, seed }),
            segment: seg,
            clusters,
            sweep,
            output: base.join(output),
            timing,
        })
    }

    pub fn model_name(&self) -> String {
        match &self.model {
            ModelSource::Fixture { shape, subdiv } => format!("{shape:?}{subdiv}").to_lowercase(),
            ModelSource::File(p) => p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
        }
    }

    fn load_model(&self) -> CliResult<TriMesh> {
        Ok(match &self.model {
            ModelSource::Fixture { shape, subdiv } => fixture(*shape, *subdiv),
            ModelSource::File(p) => io::read_obj(p)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobResult {
    pub label: String,
    pub method: Method,
    pub use_clusters: bool,
    pub params: DenoiseParams,
    pub msae: Option<f64>,
    pub ev: Option<f64>,
    pub status: String,
    pub wall_ms: Option<u128>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub use_clusters: bool,
    pub runs: usize,
    pub msae_mean: f64,
    pub msae_std: f64,
    /// Population standard deviation over the mean.
    pub msae_cv: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub jobs: Vec<JobResult>,
    pub summary: Vec<SummaryRow>,
    pub cluster_count: Option<usize>,
    pub results_csv: String,
    pub summary_csv: String,
}

impl BenchReport {
    pub fn summary_for(&self, method: Method, use_clusters: bool) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.method == method && s.use_clusters == use_clusters)
    }
}

fn run_job(
    noisy: &TriMesh,
    clean: &TriMesh,
    params: &DenoiseParams,
    labels: Option<&ClusterLabels>,
) -> clustermesh::MeshResult<metrics::MetricsReport> {
    let out = denoise::denoise(noisy, params, labels)?;
    metrics::evaluate(&out, clean, false)
}

/// Runs every sweep job and writes `results.csv`, `summary.csv` and (when
/// clusters were computed) `labels.txt` plus `clusters.ply` to the output dir.
pub fn run_bench(config: &BenchConfig) -> CliResult<BenchReport> {
    let clean = config.load_model()?;
    let noisy = match &config.noise {
        Some(spec) => noise::add_noise(&clean, spec)?,
        None => clean.clone(),
    };
    let labels = match config.clusters {
        ClusterMode::Off => None,
        _ => Some(segment(&noisy, &config.segment).map_err(|e| e.to_string())),
    };
    if let Some(Ok(l)) = &labels {
        info!(clusters = l.cluster_count, "segmented");
    }

    let specs: Vec<(usize, &DenoiseParams, bool)> = config
        .sweep
        .iter()
        .enumerate()
        .flat_map(|(k, p)| config.clusters.variants().iter().map(move |&c| (k, p, c)))
        .collect();

    let jobs: Vec<JobResult> = specs
        .par_iter()
        .map(|&(k, params, use_clusters)| {
            let start = Instant::now();
            let outcome = match (use_clusters, &labels) {
                (false, _) => run_job(&noisy, &clean, params, None).map_err(|e| e.to_string()),
                (true, Some(Ok(l))) => run_job(&noisy, &clean, params, Some(l)).map_err(|e| e.to_string()),
                (true, Some(Err(e))) => Err(format!("segmentation failed: {e}")),
                (true, None) => unreachable!("clustered job without segmentation"),
            };
            let wall_ms = config.timing.then(|| start.elapsed().as_millis());
            let label = format!("{k:03}-{}-{}", params.method(), if use_clusters { "ours" } else { "plain" });
            let (msae, ev, status) = match outcome {
                Ok(r) => (Some(r.msae), Some(r.ev), "ok".to_owned()),
                Err(e) => {
                    warn!(%label, error = %e, "job failed");
                    (None, None, format!("error: {e}"))
                }
            };
            JobResult {
                label,
                method: params.method(),
                use_clusters,
                params: *params,
                msae,
                ev,
                status,
                wall_ms,
            }
        })
        .collect();

    let summary = summarize(&jobs);
    let model = config.model_name();
    let results_csv = results_csv(&jobs, &model, config.segment.d_thr)?;
    let summary_csv = summary_csv(&summary)?;

    let dir = &config.output;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| CliError::io(p, e))
    };
    write("results.csv", &results_csv)?;
    write("summary.csv", &summary_csv)?;
    let cluster_count = match &labels {
        Some(Ok(l)) => {
            io::write_labels(l, dir.join("labels.txt"))?;
            io::write_ply_colored(&noisy, l, dir.join("clusters.ply"))?;
            Some(l.cluster_count)
        }
        _ => None,
    };
    Ok(BenchReport {
        jobs,
        summary,
        cluster_count,
        results_csv,
        summary_csv,
    })
}

fn summarize(jobs: &[JobResult]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, bool)> = Vec::new();
    for j in jobs {
        if !keys.contains(&(j.method, j.use_clusters)) {
            keys.push((j.method, j.use_clusters));
        }
    }
    keys.into_iter()
        .map(|(method, use_clusters)| {
            let values: Vec<f64> = jobs
                .iter()
                .filter(|j| j.method == method && j.use_clusters == use_clusters)
                .filter_map(|j| j.msae)
                .collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            SummaryRow {
                method,
                use_clusters,
                runs: values.len(),
                msae_mean: mean,
                msae_std: std,
                msae_cv: std / mean,
            }
        })
        .collect()
}

fn sci(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.9e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::io("<csv buffer>", std::io::Error::other(e))
}

fn results_csv(jobs: &[JobResult], model: &str, d_thr: f64) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "model", "method", "use_clusters", "dthr", "params", "msae", "ev", "status", "wall_ms"])
        .map_err(csv_err)?;
    for j in jobs {
        let dthr = if j.use_clusters { format!("{d_thr}") } else { "-".to_owned() };
        let wall = j.wall_ms.map_or_else(|| "-".to_owned(), |t| t.to_string());
        w.write_record([
            j.label.as_str(),
            model,
            j.method.name(),
            if j.use_clusters { "true" } else { "false" },
            &dthr,
            &j.params.to_string(),
            &sci(j.msae),
            &sci(j.ev),
            &j.status,
            &wall,
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

fn summary_csv(rows: &[SummaryRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "use_clusters", "runs", "msae_mean", "msae_std", "msae_cv"])
        .map_err(csv_err)?;
    for s in rows {
        w.write_record([
            s.method.name(),
            if s.use_clusters { "true" } else { "false" },
            &s.runs.to_string(),
            &sci(Some(s.msae_mean)),
            &sci(Some(s.msae_std)),
            &sci(Some(s.msae_cv)),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}
