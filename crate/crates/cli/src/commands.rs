use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clustermesh::segment::{segment, SegmentParams};
use clustermesh::{
    denoise, fixtures, io, metrics, noise, prefilter, DenoiseParams, EdgeOperatorField, NoiseSpec, Topology, TriMesh,
};
use tracing::{info, warn};

use crate::args::{
    BenchArgs, Command, DenoiseArgs, EvalArgs, FixtureArgs, NoiseArgs, SegmentArgs, Shape,
};
use crate::bench::{run_bench, BenchConfig};
use crate::{CliError, CliResult};

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Noise(a) => cmd_noise(&a),
        Command::Segment(a) => cmd_segment(&a).map(|_| ()),
        Command::Denoise(a) => cmd_denoise(&a),
        Command::Eval(a) => cmd_eval(&a).map(|_| ()),
        Command::Bench(a) => cmd_bench(&a),
        Command::MakeFixture(a) => cmd_make_fixture(&a),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "mesh".to_owned(), |s| s.to_string_lossy().into_owned())
}

fn sibling(path: &Path, name: String) -> PathBuf {
    path.with_file_name(name)
}

pub fn cmd_noise(a: &NoiseArgs) -> CliResult<()> {
    let mesh = io::read_obj(&a.input)?;
    let spec = NoiseSpec {
        sigma_factor: a.sigma,
        mode: a.mode,
        seed: a.seed,
    };
    let noisy = noise::add_noise(&mesh, &spec)?;
    let out = a
        .output
        .clone()
        .unwrap_or_else(|| sibling(&a.input, format!("{}_n{}.obj", stem(&a.input), a.sigma)));
    io::write_obj(&noisy, &out)?;
    info!(path = %out.display(), "wrote noisy mesh");
    Ok(())
}

/// Segments the input and writes the label dump and colored PLY.
/// Returns the number of clusters.
pub fn cmd_segment(a: &SegmentArgs) -> CliResult<usize> {
    let mesh = io::read_obj(&a.input)?;
    let work = match a.prefilter.params() {
        Some(p) => prefilter::prefilter(&mesh, &p)?,
        None => mesh.clone(),
    };
    // connectivity is shared, so segmenting the filtered copy labels the input faces
    let params = SegmentParams {
        d_thr: a.dthr,
        min_cluster_size: a.min_cluster,
        refine: !a.no_refine,
        ..Default::default()
    };
    let labels = segment(&work, &params)?;

    let dir = a
        .out_dir
        .clone()
        .unwrap_or_else(|| a.input.parent().map(Path::to_path_buf).unwrap_or_default());
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    }
    let name = stem(&a.input);
    io::write_labels(&labels, dir.join(format!("{name}.labels.txt")))?;
    io::write_ply_colored(&mesh, &labels, dir.join(format!("{name}.clusters.ply")))?;
    if a.dump_norms {
        let topo = Topology::build(&work)?;
        let field = EdgeOperatorField::compute(&work, &topo)?;
        let path = dir.join(format!("{name}.norms.csv"));
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        field
            .write_csv(&topo, &mut out)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(&path, e))?;
    }
    println!("clusters: {}", labels.cluster_count);
    Ok(labels.cluster_count)
}

pub fn cmd_denoise(a: &DenoiseArgs) -> CliResult<()> {
    let params = DenoiseParams::parse(a.method, &a.params).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut mesh = io::read_obj(&a.input)?;
    if let Some(sigma) = a.noise {
        let spec = NoiseSpec {
            sigma_factor: sigma,
            mode: a.noise_mode,
            seed: a.seed,
        };
        mesh = noise::add_noise(&mesh, &spec)?;
    }
    if !a.use_clusters && a.dthr.is_some() {
        warn!("--dthr has no effect without --use-clusters; ignoring it");
    }
    if !a.use_clusters && a.prefilter.prefilter {
        warn!("--prefilter has no effect without --use-clusters; ignoring it");
    }
    let seg = a.use_clusters.then(|| SegmentParams {
        d_thr: a.dthr.unwrap_or(SegmentParams::default().d_thr),
        min_cluster_size: a.min_cluster,
        prefilter: a.prefilter.params(),
        ..Default::default()
    });
    let (out, labels) = denoise::denoise_pipeline(&mesh, &params, seg.as_ref())?;
    if let Some(l) = &labels {
        info!(clusters = l.cluster_count, "segmented");
    }
    let suffix = if a.use_clusters { "_c" } else { "" };
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| sibling(&a.input, format!("{}_{}{suffix}.obj", stem(&a.input), a.method)));
    io::write_obj(&out, &path)?;
    info!(path = %path.display(), "wrote denoised mesh");
    Ok(())
}

/// Formats one `label,msae,ev` report line (no trailing newline).
pub fn eval_row(label: &str, report: &clustermesh::MetricsReport) -> String {
    format!("{label},{:.9e},{:.9e}", report.msae, report.ev)
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<String> {
    let result = io::read_obj(&a.result)?;
    let truth = io::read_obj(&a.truth)?;
    let report = metrics::evaluate(&result, &truth, false)?;
    let label = a.label.clone().unwrap_or_else(|| stem(&a.result));
    let row = eval_row(&label, &report);
    if let Some(path) = &a.report {
        let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| CliError::io(path, e))?;
        let header = if fresh { "label,msae,ev\n" } else { "" };
        writeln!(file, "{header}{row}").map_err(|e| CliError::io(path, e))?;
    }
    println!("{row}");
    Ok(row)
}

pub fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    let mut config = BenchConfig::load(&a.config)?;
    if let Some(dir) = &a.out_dir {
        config.output = dir.clone();
    }
    let report = match a.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| run_bench(&config))?,
        None => run_bench(&config)?,
    };
    print!("{}", report.summary_csv);
    Ok(())
}

pub fn fixture(shape: Shape, subdiv: usize) -> TriMesh {
    match shape {
        Shape::Cube => fixtures::cube(subdiv),
        Shape::Plane => fixtures::plane(subdiv),
        Shape::Icosahedron => fixtures::icosahedron(subdiv as u32),
        Shape::Sphere => fixtures::icosphere(subdiv as u32),
    }
}

pub fn cmd_make_fixture(a: &FixtureArgs) -> CliResult<()> {
    if matches!(a.shape, Shape::Cube | Shape::Plane) && a.subdiv == 0 {
        return Err(CliError::Usage("cube and plane need --subdiv >= 1".into()));
    }
    if matches!(a.shape, Shape::Icosahedron | Shape::Sphere) && a.subdiv > 8 {
        return Err(CliError::Usage("--subdiv above 8 is too large for this shape".into()));
    }
    let mesh = fixture(a.shape, a.subdiv);
    let name = format!("{:?}{}.obj", a.shape, a.subdiv).to_lowercase();
    let path = a.output.clone().unwrap_or_else(|| PathBuf::from(name));
    io::write_obj(&mesh, &path)?;
    println!("faces: {}", mesh.face_count());
    Ok(())
}
