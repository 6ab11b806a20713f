//! Command-line front end for the multi-view anchor-graph clusterer.
//!
//! Exit codes: 0 success (including inexact component counts, which warn on
//! stderr), 2 flag/usage errors, 3 load errors, 4 solver degeneracy.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tenview",
    version,
    about = "Multi-view clustering via anchor bipartite graphs and tensor Schatten p-norm regularization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a dataset (or a synthetic instance) and export results.
    Cluster(ClusterArgs),
    /// Generate a synthetic multi-view dataset directory.
    Synth(SynthArgs),
    /// Time the solver across dataset sizes and fit the scaling slope.
    Bench(BenchArgs),
    /// Score a predicted labels file against ground truth.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct ClusterArgs {
    /// Dataset directory holding view1.csv..viewV.csv and optional labels.csv.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    data: Option<PathBuf>,
    /// Inline synthetic spec, e.g. "n=300,k=3,v=3,sep=10" (keys: n,k,v,
    /// dims,sep,noise,corrupt,seed; per-view values separated by '|').
    #[arg(long)]
    synth: Option<String>,
    /// Number of clusters K.
    #[arg(long)]
    clusters: usize,
    /// Anchor count: a ratio in (0,1] or an absolute count > 1.
    #[arg(long, default_value = "0.5", value_parser = parse_anchors)]
    anchors: tenview::solver::AnchorCount,
    /// Weight of the tensor Schatten p-norm term.
    #[arg(long, default_value_t = 1.0, value_parser = parse_nonneg)]
    lambda: f64,
    /// Schatten exponent, in (0, 1].
    #[arg(long, default_value_t = 0.4, value_parser = parse_p)]
    p: f64,
    /// Neighbors for graph initialization (default min(15, M-1)).
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Parameter sweep, e.g. "p=0.1:1.0:0.1" or "anchors=0.1:1.0:0.2";
    /// writes one row per grid point to out/sweep.csv.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Spec string, same grammar as `cluster --synth`.
    #[arg(long)]
    spec: String,
    /// Directory to write view1.csv..viewV.csv and labels.csv into.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated sample counts.
    #[arg(long, default_value = "1000,2000,4000,8000")]
    sizes: String,
    /// Fixed anchor count.
    #[arg(long, default_value_t = 100)]
    anchors: usize,
    #[arg(long, default_value_t = 3)]
    views: usize,
    #[arg(long, default_value_t = 20)]
    dims: usize,
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    /// Fixed iteration count (convergence checks disabled).
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the timing table.
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Predicted labels, one id per line.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth labels, one id per line.
    #[arg(long)]
    truth: PathBuf,
    /// Optional output file (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_p(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("p must lie in (0, 1], got {v}"))
    }
}

fn parse_nonneg(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite and nonnegative, got {v}"))
    }
}

fn parse_anchors(s: &str) -> Result<tenview::solver::AnchorCount, String> {
    use tenview::solver::AnchorCount;
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(AnchorCount::Ratio(v))
    } else if v > 1.0 && v.fract() == 0.0 {
        Ok(AnchorCount::Count(v as usize))
    } else {
        Err(format!(
            "anchors must be a ratio in (0, 1] or an integer count > 1, got {s}"
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Cluster(args) => commands::run_cluster(args),
        Command::Synth(args) => commands::run_synth(args),
        Command::Bench(args) => commands::run_bench(args),
        Command::Metrics(args) => commands::run_metrics(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
