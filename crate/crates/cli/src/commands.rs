//! Subcommand implementations.

use std::process::ExitCode;
use std::time::Instant;

use tenview::anchor::{AnchorStrategy, MultiViewDataset};
use tenview::metrics::{report, MetricsReport};
use tenview::solver::{solve, AnchorCount, SolveResult, SolveStatus, SolverConfig};
use tenview::synth::{generate_synth, SynthSpec};

use crate::io::{
    fingerprint, flat_json, json_num, json_str, labels_to_csv, load_dataset, matrix_to_csv,
    parse_labels, write_atomic, LoadError,
};
use crate::{BenchArgs, ClusterArgs, MetricsArgs, SynthArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Load(LoadError),
    Degenerate,
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Load(e) => write!(f, "{e}"),
            CliError::Degenerate => write!(
                f,
                "data is degenerate (all points identical); no cluster structure to learn"
            ),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Load(_) => ExitCode::from(3),
            CliError::Degenerate => ExitCode::from(4),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Load(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

// Solver-side parameter rejections are user input problems at this level.
impl From<tenview::Error> for CliError {
    fn from(e: tenview::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Parses the inline synthetic-spec grammar:
/// `n=300,k=3,v=3,dims=6|4,sep=10,noise=1.0,corrupt=0.1,seed=7`.
/// Per-view lists use '|'; scalars broadcast over views.
pub fn parse_synth_spec(text: &str, default_seed: u64) -> Result<SynthSpec, String> {
    let mut n = 300usize;
    let mut k = 3usize;
    let mut v = 3usize;
    let mut dims_raw: Option<Vec<usize>> = None;
    let mut sep = 10.0f64;
    let mut noise_raw: Option<Vec<f64>> = None;
    let mut corrupt = 0.0f64;
    let mut seed = default_seed;
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
        let bad = |what: &str| format!("bad value for {what}: '{value}'");
        match key.trim() {
            "n" => n = value.parse().map_err(|_| bad("n"))?,
            "k" => k = value.parse().map_err(|_| bad("k"))?,
            "v" => v = value.parse().map_err(|_| bad("v"))?,
            "dims" => {
                let list: Result<Vec<usize>, _> =
                    value.split('|').map(|d| d.trim().parse()).collect();
                dims_raw = Some(list.map_err(|_| bad("dims"))?);
            }
            "sep" => sep = value.parse().map_err(|_| bad("sep"))?,
            "noise" => {
                let list: Result<Vec<f64>, _> =
                    value.split('|').map(|d| d.trim().parse()).collect();
                noise_raw = Some(list.map_err(|_| bad("noise"))?);
            }
            "corrupt" => corrupt = value.parse().map_err(|_| bad("corrupt"))?,
            "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
            other => return Err(format!("unknown synth key '{other}'")),
        }
    }
    let broadcast = |list: Option<Vec<usize>>, default: usize| -> Result<Vec<usize>, String> {
        match list {
            None => Ok(vec![default; v]),
            Some(l) if l.len() == 1 => Ok(vec![l[0]; v]),
            Some(l) if l.len() == v => Ok(l),
            Some(l) => Err(format!("expected 1 or {v} entries, got {}", l.len())),
        }
    };
    let dims = broadcast(dims_raw, 10)?;
    let noise = match noise_raw {
        None => vec![1.0; v],
        Some(l) if l.len() == 1 => vec![l[0]; v],
        Some(l) if l.len() == v => l,
        Some(l) => return Err(format!("expected 1 or {v} noise entries, got {}", l.len())),
    };
    Ok(SynthSpec {
        n,
        k,
        v,
        dims,
        separation: sep,
        noise,
        view_corruption: corrupt,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    P,
    Anchors,
}

fn parse_sweep(text: &str) -> Result<(SweepParam, Vec<f64>), String> {
    let (name, grid) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=start:stop:step, got '{text}'"))?;
    let param = match name.trim() {
        "p" => SweepParam::P,
        "anchors" => SweepParam::Anchors,
        other => return Err(format!("sweep parameter must be 'p' or 'anchors', got '{other}'")),
    };
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got '{grid}'"));
    }
    let parse = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse()
            .map_err(|_| format!("bad sweep number '{s}'"))
    };
    let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if step <= 0.0 || stop < start {
        return Err("sweep needs stop >= start and step > 0".into());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let values: Vec<f64> = (0..count).map(|i| start + i as f64 * step).collect();
    for &val in &values {
        if !(val > 0.0 && val <= 1.0 + 1e-12) {
            return Err(format!("sweep value {val} outside (0, 1]"));
        }
    }
    Ok((param, values.into_iter().map(|x| x.min(1.0)).collect()))
}

fn base_config(args: &ClusterArgs) -> SolverConfig {
    SolverConfig {
        anchors: args.anchors,
        k_clusters: args.clusters,
        lambda: args.lambda,
        p: args.p,
        knn: args.knn,
        max_iter: args.max_iter,
        seed: args.seed,
        ..Default::default()
    }
}

fn metrics_json(report: &MetricsReport) -> String {
    flat_json(&[
        ("acc", json_num(report.acc)),
        ("nmi", json_num(report.nmi)),
        ("purity", json_num(report.purity)),
        ("precision", json_num(report.precision)),
        ("recall", json_num(report.recall)),
        ("f_score", json_num(report.f_score)),
        ("ari", json_num(report.ari)),
    ])
}

fn history_csv(result: &SolveResult) -> String {
    let mut out = String::new();
    for r in &result.history {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.iter, r.objective, r.residual, r.zero_eigs, r.beta, r.mu
        ));
    }
    out
}

fn graph_csv(result: &SolveResult) -> String {
    let mut out = String::new();
    for ((i, j), &w) in result.shared.indexed_iter() {
        if w > 0.0 {
            out.push_str(&format!("{i},{j},{w}\n"));
        }
    }
    out
}

pub fn run_cluster(args: ClusterArgs) -> Result<ExitCode, CliError> {
    let t0 = Instant::now();
    let data = if let Some(dir) = &args.data {
        load_dataset(dir)?
    } else {
        let spec_text = args.synth.as_deref().expect("clap enforces data|synth");
        let spec = parse_synth_spec(spec_text, args.seed).map_err(CliError::Usage)?;
        generate_synth(&spec)?
    };
    let t_load = t0.elapsed().as_secs_f64();
    let cfg = base_config(&args);

    if let Some(sweep_text) = &args.sweep {
        let (param, values) = parse_sweep(sweep_text).map_err(CliError::Usage)?;
        return run_sweep(&args, &data, &cfg, param, &values, t_load);
    }

    let t1 = Instant::now();
    let result = solve(&data, &cfg)?;
    let t_solve = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let out = &args.out;
    write_atomic(&out.join("labels.csv"), &labels_to_csv(&result.labels))?;
    write_atomic(&out.join("history.csv"), &history_csv(&result))?;
    write_atomic(&out.join("graph.csv"), &graph_csv(&result))?;
    let scores = match data.labels() {
        Some(truth) => {
            let rep = report(&result.labels, truth)?;
            write_atomic(&out.join("metrics.json"), &metrics_json(&rep))?;
            Some(rep)
        }
        None => None,
    };
    let t_write = t2.elapsed().as_secs_f64();
    write_manifest(&args, &data, &cfg, Some(&result), t_load, t_solve, t_write, None)?;

    if result.status == SolveStatus::Degenerate {
        return Err(CliError::Degenerate);
    }
    if !result.exact_k {
        eprintln!(
            "warning: learned graph had {} components before merging, not the requested {}",
            result
                .history
                .last()
                .map(|r| r.zero_eigs.to_string())
                .unwrap_or_else(|| "?".into()),
            args.clusters
        );
    }
    if let Some(rep) = scores {
        println!(
            "acc={} nmi={} purity={} ari={} status={} exact_k={}",
            rep.acc, rep.nmi, rep.purity, rep.ari, result.status, result.exact_k
        );
    } else {
        println!("status={} exact_k={}", result.status, result.exact_k);
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    args: &ClusterArgs,
    data: &MultiViewDataset,
    cfg: &SolverConfig,
    result: Option<&SolveResult>,
    t_load: f64,
    t_solve: f64,
    t_write: f64,
    sweep: Option<&str>,
) -> Result<(), CliError> {
    let n = data.n_samples();
    let dims: Vec<String> = (0..data.n_views())
        .map(|v| data.view(v).ncols().to_string())
        .collect();
    let m = cfg.anchors.resolve(n)?;
    let mut pairs: Vec<(&str, String)> = vec![
        ("version", json_str(env!("CARGO_PKG_VERSION"))),
        ("command", json_str(if sweep.is_some() { "cluster-sweep" } else { "cluster" })),
        ("seed", format!("{}", cfg.seed)),
        ("dataset_hash", json_str(&fingerprint(data))),
        ("n", format!("{n}")),
        ("views", format!("{}", data.n_views())),
        ("dims", json_str(&dims.join("|"))),
        ("anchors", format!("{m}")),
        ("clusters", format!("{}", cfg.k_clusters)),
        ("lambda", json_num(cfg.lambda)),
        ("p", json_num(cfg.p)),
        (
            "knn",
            format!("{}", cfg.knn.unwrap_or_else(|| 15.min(m.saturating_sub(1)).max(1))),
        ),
        ("max_iter", format!("{}", cfg.max_iter)),
        ("strategy", json_str(&cfg.anchor_strategy.to_string())),
        ("t_load_s", json_num(t_load)),
        ("t_solve_s", json_num(t_solve)),
        ("t_write_s", json_num(t_write)),
    ];
    if let Some(r) = result {
        pairs.push(("status", json_str(&r.status.to_string())));
        pairs.push(("exact_k", format!("{}", r.exact_k)));
        pairs.push(("iterations", format!("{}", r.history.len())));
    }
    if let Some(s) = sweep {
        pairs.push(("sweep", json_str(s)));
    }
    write_atomic(&args.out.join("manifest.json"), &flat_json(&pairs))?;
    Ok(())
}

fn run_sweep(
    args: &ClusterArgs,
    data: &MultiViewDataset,
    cfg: &SolverConfig,
    param: SweepParam,
    values: &[f64],
    t_load: f64,
) -> Result<ExitCode, CliError> {
    let t1 = Instant::now();
    let mut rows = String::new();
    for &value in values {
        let mut point_cfg = cfg.clone();
        match param {
            SweepParam::P => point_cfg.p = value,
            SweepParam::Anchors => point_cfg.anchors = AnchorCount::Ratio(value),
        }
        let result = solve(data, &point_cfg)?;
        if result.status == SolveStatus::Degenerate {
            return Err(CliError::Degenerate);
        }
        let rep = data
            .labels()
            .map(|truth| report(&result.labels, truth))
            .transpose()?;
        let fmt = |f: Option<f64>| f.map_or("nan".to_string(), |x| format!("{x}"));
        rows.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            value,
            fmt(rep.map(|r| r.acc)),
            fmt(rep.map(|r| r.nmi)),
            fmt(rep.map(|r| r.purity)),
            fmt(rep.map(|r| r.precision)),
            fmt(rep.map(|r| r.recall)),
            fmt(rep.map(|r| r.f_score)),
            fmt(rep.map(|r| r.ari)),
            if result.exact_k { 1 } else { 0 },
        ));
    }
    let t_solve = t1.elapsed().as_secs_f64();
    write_atomic(&args.out.join("sweep.csv"), &rows)?;
    write_manifest(
        args,
        data,
        cfg,
        None,
        t_load,
        t_solve,
        0.0,
        args.sweep.as_deref(),
    )?;
    println!("swept {} grid points into {}", values.len(), args.out.join("sweep.csv").display());
    Ok(ExitCode::SUCCESS)
}

pub fn run_synth(args: SynthArgs) -> Result<ExitCode, CliError> {
    let spec = parse_synth_spec(&args.spec, args.seed).map_err(CliError::Usage)?;
    let data = generate_synth(&spec)?;
    for v in 0..data.n_views() {
        let path = args.out.join(format!("view{}.csv", v + 1));
        write_atomic(&path, &matrix_to_csv(&data.view(v).to_owned()))?;
    }
    write_atomic(
        &args.out.join("labels.csv"),
        &labels_to_csv(data.labels().expect("synthetic data always has labels")),
    )?;
    println!(
        "wrote {} views of {} samples to {}",
        data.n_views(),
        data.n_samples(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn run_bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    let sizes: Result<Vec<usize>, _> = args
        .sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect();
    let sizes = sizes.map_err(|_| CliError::Usage(format!("bad --sizes list '{}'", args.sizes)))?;
    if sizes.is_empty() {
        return Err(CliError::Usage("need at least one size".into()));
    }
    for &n in &sizes {
        if n < args.anchors {
            return Err(CliError::Usage(format!(
                "size {n} is below the anchor count {}",
                args.anchors
            )));
        }
    }
    if args.anchors < args.clusters {
        return Err(CliError::Usage(format!(
            "anchor count {} is below the cluster count {}",
            args.anchors, args.clusters
        )));
    }

    let mut rows = String::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (idx, &n) in sizes.iter().enumerate() {
        let spec = SynthSpec {
            n,
            k: args.clusters,
            v: args.views,
            dims: vec![args.dims; args.views],
            separation: 8.0,
            noise: vec![1.0; args.views],
            view_corruption: 0.0,
            seed: args.seed.wrapping_add(idx as u64),
        };
        let data = generate_synth(&spec)?;
        let cfg = SolverConfig {
            anchors: AnchorCount::Count(args.anchors),
            k_clusters: args.clusters,
            max_iter: args.iters,
            // negative tolerance disables convergence: timing wants a
            // fixed iteration count
            tol_residual: -1.0,
            anchor_strategy: AnchorStrategy::UniformSample,
            seed: args.seed,
            ..Default::default()
        };
        let t = Instant::now();
        let result = solve(&data, &cfg)?;
        let total = t.elapsed().as_secs_f64();
        if result.status == SolveStatus::Degenerate {
            return Err(CliError::Degenerate);
        }
        let per_iter = total / args.iters as f64;
        println!("n={n}: {per_iter:.4} s/iter ({total:.3} s total)");
        rows.push_str(&format!("{n},{per_iter},{total}\n"));
        points.push(((n as f64).ln(), per_iter.ln()));
    }
    write_atomic(&args.out, &rows)?;

    if points.len() >= 2 {
        let slope = fit_slope(&points);
        println!("fitted log-log slope: {slope:.3}");
    } else {
        println!("fitted log-log slope: n/a (need at least 2 sizes)");
    }
    Ok(ExitCode::SUCCESS)
}

/// Least-squares slope of y against x.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    cov / var
}

pub fn run_metrics(args: MetricsArgs) -> Result<ExitCode, CliError> {
    let pred = parse_labels(&args.pred)?;
    let truth = parse_labels(&args.truth)?;
    if pred.len() != truth.len() {
        return Err(CliError::Load(LoadError::LabelLength {
            file: args.pred.clone(),
            expected: truth.len(),
            got: pred.len(),
        }));
    }
    let rep = report(&pred, &truth).map_err(|e| CliError::Load(LoadError::Invalid(e.to_string())))?;
    let json = metrics_json(&rep);
    match &args.out {
        Some(path) => write_atomic(path, &json)?,
        None => print!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}
