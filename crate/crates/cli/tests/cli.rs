use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn clustermesh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clustermesh"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn fixtures_have_expected_face_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (args, faces) in [
        (["cube", "--subdiv", "10"], 1200),
        (["icosahedron", "--subdiv", "0"], 20),
        (["plane", "--subdiv", "4"], 32),
    ] {
        let mut full = vec!["make-fixture"];
        full.extend(args);
        let o = clustermesh(dir.path(), &full);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o).trim(), format!("faces: {faces}"));
    }
    assert!(dir.path().join("cube10.obj").exists());
    assert!(dir.path().join("icosahedron0.obj").exists());
    assert_eq!(code(&clustermesh(dir.path(), &["make-fixture", "torus"])), 64);
}

#[test]
fn segment_reports_clusters_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    clustermesh(dir.path(), &["make-fixture", "cube", "--subdiv", "10"]);

    let o = clustermesh(dir.path(), &["segment", "cube10.obj", "--dthr", "1e-6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "clusters: 6");
    let labels = fs::read_to_string(dir.path().join("cube10.labels.txt")).unwrap();
    assert_eq!(labels.lines().count(), 1200);
    assert!(dir.path().join("cube10.clusters.ply").exists());

    let o = clustermesh(dir.path(), &["segment", "cube10.obj", "--dthr", "inf", "--dump-norms", "--out-dir", "seg"]);
    assert_eq!(stdout(&o).trim(), "clusters: 1");
    let norms = fs::read_to_string(dir.path().join("seg/cube10.norms.csv")).unwrap();
    // header plus one row per edge (E = 3F/2 on a closed mesh)
    assert_eq!(norms.lines().count(), 1 + 1800);
    assert!(norms.starts_with("edge_id,v0,v1,norm\n"));
}

#[test]
fn noise_is_deterministic_and_named_after_sigma() {
    let dir = tempfile::tempdir().unwrap();
    clustermesh(dir.path(), &["make-fixture", "cube", "--subdiv", "4", "-o", "cube.obj"]);
    let o = clustermesh(dir.path(), &["noise", "cube.obj", "--sigma", "0.2", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let first = fs::read(dir.path().join("cube_n0.2.obj")).unwrap();
    clustermesh(dir.path(), &["noise", "cube.obj", "--sigma", "0.2", "--seed", "7"]);
    assert_eq!(first, fs::read(dir.path().join("cube_n0.2.obj")).unwrap());

    clustermesh(dir.path(), &["noise", "cube.obj", "--sigma", "0", "-o", "same.obj"]);
    assert_eq!(
        fs::read(dir.path().join("same.obj")).unwrap(),
        fs::read(dir.path().join("cube.obj")).unwrap()
    );
}

#[test]
fn denoise_then_eval_appends_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    clustermesh(dir.path(), &["make-fixture", "cube", "--subdiv", "8", "-o", "cube.obj"]);
    clustermesh(dir.path(), &["noise", "cube.obj", "--sigma", "0.3", "--seed", "1", "-o", "noisy.obj"]);

    let o = clustermesh(
        dir.path(),
        &["denoise", "noisy.obj", "--method", "bnf", "--params", "0.35,20,10", "--dthr", "0.01"],
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--dthr has no effect"));
    assert!(dir.path().join("noisy_bnf.obj").exists());

    let o = clustermesh(
        dir.path(),
        &["denoise", "noisy.obj", "--method", "bnf", "--params", "0.35,20,10", "--use-clusters", "--dthr", "0.01", "--min-cluster", "20"],
    );
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("noisy_bnf_c.obj").exists());

    for (file, label) in [("noisy.obj", "noisy"), ("noisy_bnf.obj", "bnf"), ("noisy_bnf_c.obj", "ours")] {
        let o = clustermesh(dir.path(), &["eval", file, "cube.obj", "--label", label, "--report", "report.csv"]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).starts_with(&format!("{label},")));
    }
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows: Vec<&str> = report.lines().collect();
    assert_eq!(rows[0], "label,msae,ev");
    assert_eq!(rows.len(), 4);
    let msae = |row: &str| row.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(msae(rows[2]) < msae(rows[1]));

    let o = clustermesh(dir.path(), &["eval", "cube.obj", "cube.obj"]);
    assert_eq!(stdout(&o).trim(), "cube,0.000000000e0,0.000000000e0");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    clustermesh(dir.path(), &["make-fixture", "cube", "--subdiv", "2", "-o", "a.obj"]);
    clustermesh(dir.path(), &["make-fixture", "cube", "--subdiv", "3", "-o", "b.obj"]);
    fs::write(dir.path().join("quad.obj"), "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();

    assert_eq!(code(&clustermesh(dir.path(), &["eval", "a.obj", "missing.obj"])), 2);
    assert_eq!(code(&clustermesh(dir.path(), &["segment", "quad.obj"])), 2);
    assert_eq!(code(&clustermesh(dir.path(), &["eval", "a.obj", "b.obj"])), 3);
    assert_eq!(code(&clustermesh(dir.path(), &["denoise", "a.obj", "--method", "bnf", "--params", "0.3,x,1"])), 64);
    assert_eq!(code(&clustermesh(dir.path(), &["denoise", "a.obj", "--method", "nope", "--params", "1,1,1"])), 64);
    assert_eq!(code(&clustermesh(dir.path(), &["frobnicate"])), 64);
    assert_eq!(code(&clustermesh(dir.path(), &["--help"])), 0);
}

#[test]
fn bench_writes_paired_rows_and_rejects_empty_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.conf"),
        "model = cube\nsubdiv = 6\nnoise.sigma = 0.3\nseed = 5\ndthr = 0.01\nmin_cluster = 20\n\
         sweep.unf = 0.5,5,5\nsweep.unf = 0.7,5,5\nsweep.l1 = 30,5,5\noutput = out\n",
    )
    .unwrap();
    let o = clustermesh(dir.path(), &["bench", "run.conf", "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    let rows: Vec<&str> = results.lines().collect();
    assert_eq!(rows[0], "label,model,method,use_clusters,dthr,params,msae,ev,status,wall_ms");
    assert_eq!(rows.len(), 1 + 3 * 2);
    assert!(rows[1].starts_with("000-unf-plain,cube6,unf,false,-,\"0.5,5,5\","));
    assert!(rows[2].starts_with("000-unf-ours,cube6,unf,true,0.01,\"0.5,5,5\","));
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok,-")));
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    assert!(dir.path().join("out/clusters.ply").exists());

    fs::write(dir.path().join("empty.conf"), "model = cube\n").unwrap();
    assert_eq!(code(&clustermesh(dir.path(), &["bench", "empty.conf"])), 64);
    assert_eq!(code(&clustermesh(dir.path(), &["bench", "missing.conf"])), 2);
}
