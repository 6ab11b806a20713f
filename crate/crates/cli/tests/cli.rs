//! End-to-end runs of the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tenview")
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tenview-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn cluster_synth_writes_all_outputs() {
    let dir = temp_dir("outputs");
    let out = run(&[
        "cluster",
        "--synth",
        "n=120,k=3,v=2,sep=10,dims=5",
        "--clusters",
        "3",
        "--anchors",
        "20",
        "--seed",
        "4",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["labels.csv", "history.csv", "graph.csv", "metrics.json", "manifest.json"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    // labels: one integer per line, N lines
    let labels = fs::read_to_string(dir.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 120);
    for l in labels.lines() {
        l.parse::<usize>().unwrap();
    }
    // metrics keys: exactly the seven, in order
    let metrics = fs::read_to_string(dir.join("metrics.json")).unwrap();
    let keys: Vec<&str> = metrics
        .lines()
        .filter_map(|l| l.trim().strip_prefix('"'))
        .map(|l| l.split('"').next().unwrap())
        .collect();
    assert_eq!(
        keys,
        vec!["acc", "nmi", "purity", "precision", "recall", "f_score", "ari"]
    );
    // history columns
    let history = fs::read_to_string(dir.join("history.csv")).unwrap();
    let first = history.lines().next().unwrap();
    assert_eq!(first.split(',').count(), 6);
    assert!(first.starts_with("1,"));
}

#[test]
fn default_anchor_ratio_is_half() {
    let dir = temp_dir("defaultanchors");
    let out = run(&[
        "cluster",
        "--synth",
        "n=80,k=2,v=1,sep=9,dims=3",
        "--clusters",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let manifest = fs::read_to_string(dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"anchors\": 40"), "{manifest}");
}

#[test]
fn graph_rows_sum_to_one() {
    let dir = temp_dir("graphsum");
    let out = run(&[
        "cluster",
        "--synth",
        "n=90,k=3,v=2,sep=9,dims=4",
        "--clusters",
        "3",
        "--anchors",
        "15",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let graph = fs::read_to_string(dir.join("graph.csv")).unwrap();
    let mut sums = vec![0.0f64; 90];
    for line in graph.lines() {
        let mut parts = line.split(',');
        let i: usize = parts.next().unwrap().parse().unwrap();
        let _j: usize = parts.next().unwrap().parse().unwrap();
        let w: f64 = parts.next().unwrap().parse().unwrap();
        sums[i] += w;
    }
    for (i, s) in sums.iter().enumerate() {
        assert!((s - 1.0).abs() < 1e-6, "row {i} sums to {s}");
    }
}

#[test]
fn metrics_emitted_iff_truth_present() {
    let ds = temp_dir("nolabels-ds");
    let synth = run(&[
        "synth",
        "--spec",
        "n=40,k=2,v=1,dims=3,sep=9",
        "--out",
        ds.to_str().unwrap(),
    ]);
    assert_eq!(code(&synth), 0);
    fs::remove_file(ds.join("labels.csv")).unwrap();
    let outdir = temp_dir("nolabels-run");
    let out = run(&[
        "cluster",
        "--data",
        ds.to_str().unwrap(),
        "--clusters",
        "2",
        "--anchors",
        "8",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!outdir.join("metrics.json").exists());
    assert!(outdir.join("labels.csv").exists());
}

#[test]
fn synth_then_load_round_trips() {
    let ds = temp_dir("roundtrip-ds");
    let out = run(&[
        "synth",
        "--spec",
        "n=30,k=3,v=2,dims=4|2,sep=8,seed=3",
        "--out",
        ds.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(ds.join("view1.csv").exists());
    assert!(ds.join("view2.csv").exists());
    let v1 = fs::read_to_string(ds.join("view1.csv")).unwrap();
    assert_eq!(v1.lines().count(), 30);
    assert_eq!(v1.lines().next().unwrap().split(',').count(), 4);
    let v2 = fs::read_to_string(ds.join("view2.csv")).unwrap();
    assert_eq!(v2.lines().next().unwrap().split(',').count(), 2);
    let run_out = temp_dir("roundtrip-run");
    let out = run(&[
        "cluster",
        "--data",
        ds.to_str().unwrap(),
        "--clusters",
        "3",
        "--anchors",
        "9",
        "--out",
        run_out.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn load_errors_exit_3_and_name_files() {
    // row-count mismatch between views
    let ds = temp_dir("mismatch");
    write(&ds.join("view1.csv"), "1,2\n3,4\n5,6\n7,8\n");
    write(&ds.join("view2.csv"), "1\n2\n3\n4\n5\n");
    let out = run(&["cluster", "--data", ds.to_str().unwrap(), "--clusters", "2"]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("view2.csv") && err.contains("view1.csv"), "{err}");

    // short labels file
    let ds = temp_dir("shortlabels");
    write(&ds.join("view1.csv"), "1,2\n3,4\n5,6\n7,8\n");
    write(&ds.join("labels.csv"), "0\n1\n0\n");
    let out = run(&["cluster", "--data", ds.to_str().unwrap(), "--clusters", "2"]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("labels.csv") && err.contains('3') && err.contains('4'), "{err}");

    // ragged rows
    let ds = temp_dir("ragged");
    write(&ds.join("view1.csv"), "1,2\n3,4,5\n");
    let out = run(&["cluster", "--data", ds.to_str().unwrap(), "--clusters", "2"]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("view1.csv:2"), "{err}");

    // non-numeric cell
    let ds = temp_dir("nonnumeric");
    write(&ds.join("view1.csv"), "1,2\n3,oops\n");
    let out = run(&["cluster", "--data", ds.to_str().unwrap(), "--clusters", "2"]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("view1.csv:2") && err.contains("oops"), "{err}");
}

#[test]
fn bad_flags_exit_2() {
    let out = run(&["cluster", "--synth", "n=30,k=2", "--clusters", "2", "--p", "0"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("(0, 1]"), "{err}");

    let out = run(&["cluster", "--clusters", "2"]); // neither --data nor --synth
    assert_eq!(code(&out), 2);

    let out = run(&["cluster", "--synth", "n=30,k=2,bogus=1", "--clusters", "2"]);
    assert_eq!(code(&out), 2);

    let out = run(&[
        "cluster",
        "--synth",
        "n=30,k=2",
        "--clusters",
        "2",
        "--anchors",
        "2.5",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn degenerate_data_exits_4() {
    let ds = temp_dir("degenerate");
    write(&ds.join("view1.csv"), "1,2\n1,2\n1,2\n1,2\n");
    let out = run(&[
        "cluster",
        "--data",
        ds.to_str().unwrap(),
        "--clusters",
        "2",
        "--anchors",
        "2",
        "--out",
        temp_dir("degenerate-out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn runs_are_byte_identical() {
    let args = |out: &Path| {
        vec![
            "cluster".to_string(),
            "--synth".into(),
            "n=100,k=3,v=2,sep=9,dims=4,seed=12".into(),
            "--clusters".into(),
            "3".into(),
            "--anchors".into(),
            "16".into(),
            "--seed".into(),
            "12".into(),
            "--max-iter".into(),
            "80".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let d1 = temp_dir("det1");
    let d2 = temp_dir("det2");
    let o1 = Command::new(bin()).args(args(&d1)).output().unwrap();
    let o2 = Command::new(bin()).args(args(&d2)).output().unwrap();
    assert_eq!(code(&o1), 0);
    assert_eq!(code(&o2), 0);
    for f in ["labels.csv", "history.csv", "graph.csv"] {
        let a = fs::read(d1.join(f)).unwrap();
        let b = fs::read(d2.join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn sweep_writes_grid_rows() {
    let dir = temp_dir("sweep");
    let out = run(&[
        "cluster",
        "--synth",
        "n=60,k=2,v=2,sep=9,dims=4",
        "--clusters",
        "2",
        "--anchors",
        "12",
        "--sweep",
        "p=0.2:1.0:0.2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
    for line in sweep.lines() {
        assert_eq!(line.split(',').count(), 9);
    }
    // anchors sweep too
    let out = run(&[
        "cluster",
        "--synth",
        "n=60,k=2,v=2,sep=9,dims=4",
        "--clusters",
        "2",
        "--sweep",
        "anchors=0.2:0.6:0.2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let sweep = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
}

#[test]
fn bench_single_size_reports_na() {
    let dir = temp_dir("bench1");
    let csv = dir.join("bench.csv");
    let out = run(&[
        "bench",
        "--sizes",
        "300",
        "--anchors",
        "30",
        "--iters",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n/a"), "{stdout}");
    let table = fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 1);
    assert_eq!(table.lines().next().unwrap().split(',').count(), 3);
}

#[test]
fn metrics_subcommand_scores_files() {
    let dir = temp_dir("metriccmd");
    write(&dir.join("pred.csv"), "0\n0\n1\n1\n");
    write(&dir.join("truth.csv"), "1\n1\n0\n0\n");
    let out = run(&[
        "metrics",
        "--pred",
        dir.join("pred.csv").to_str().unwrap(),
        "--truth",
        dir.join("truth.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"acc\": 1"), "{stdout}");

    // length mismatch is a load error
    write(&dir.join("short.csv"), "0\n1\n");
    let out = run(&[
        "metrics",
        "--pred",
        dir.join("short.csv").to_str().unwrap(),
        "--truth",
        dir.join("truth.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}
