//! Batch front end: generation, normalization, distances, clustering, PCA,
//! triangle scans and benchmarks over weighted projective point sets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod metric;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use finsler_wps::cluster::Linkage;
use finsler_wps::pca::NormalizeMode;
use serde::Serialize;

use metric::{Metric, OptimizerArgs};

/// An error caused by the invocation rather than the computation.
#[derive(Debug)]
pub struct UsageError(String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> Self {
        UsageError(msg.into())
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(
    name = "finsler-wps",
    version,
    about = "Distances and clustering on weighted projective spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset or rational moduli points.
    Gen(GenArgs),
    /// Normalize every point of a point set.
    Normalize(NormalizeArgs),
    /// Weighted heights of integer points.
    Height(HeightArgs),
    /// Distance between two points of a point set.
    Dist(DistArgs),
    /// Pairwise distance matrix.
    Matrix(MatrixArgs),
    /// Agglomerative clustering of a distance matrix.
    Cluster(ClusterArgs),
    /// Flat partition from a saved dendrogram.
    Cut(CutArgs),
    /// Weighted principal component analysis.
    Pca(PcaArgs),
    /// Sample triples and report triangle-inequality violations.
    ScanTriangle(ScanArgs),
    /// Compare metrics on a seeded synthetic dataset.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    /// Gaussian clusters around random centers.
    Synthetic,
    /// Distinct integer points of P(2,4,6,10) below a height bound.
    Moduli,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Synthetic)]
    pub kind: GenKind,
    /// Weights, e.g. `2,1` (synthetic only).
    #[arg(long, default_value = "2,1")]
    pub space: String,
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 30)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 0.01)]
    pub spread: f64,
    /// Number of points (moduli only).
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Weighted height bound (moduli only).
    #[arg(long, default_value_t = 10.0)]
    pub height_bound: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Point-set file; `.csv` selects CSV, anything else JSON. Stdout if omitted.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Also write the labels as `index,label` CSV.
    #[arg(long)]
    #[serde(skip)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct NormalizeArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub mode: NormalizeMode,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HeightArgs {
    pub input: PathBuf,
    /// CSV `index,wgcd,height`. Stdout if omitted.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DistArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub metric: Metric,
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    /// Seed for the optimizers' random starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Full result as JSON, including the geodesic path for Finsler metrics.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MatrixArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub metric: Metric,
    /// Worker threads; 0 uses all cores. Does not change the output.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CutOptions {
    /// Cut into exactly K clusters.
    #[arg(long, conflicts_with = "cut_height")]
    pub cut_k: Option<usize>,
    /// Cut at a merge height.
    #[arg(long)]
    pub cut_height: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    /// Distance matrix JSON.
    pub input: PathBuf,
    #[arg(long, default_value = "single")]
    pub linkage: Linkage,
    #[command(flatten)]
    pub cut: CutOptions,
    /// Write the tree in Newick format.
    #[arg(long)]
    #[serde(skip)]
    pub newick: Option<PathBuf>,
    /// Write the dendrogram JSON.
    #[arg(long)]
    #[serde(skip)]
    pub dendrogram: Option<PathBuf>,
    /// Partition CSV when a cut is given, dendrogram JSON otherwise.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("criterion").required(true).args(["cut_k", "cut_height"])))]
pub struct CutArgs {
    /// Dendrogram JSON.
    pub input: PathBuf,
    #[command(flatten)]
    pub cut: CutOptions,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PcaArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Skip centering at the mean.
    #[arg(long)]
    pub no_center: bool,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub metric: Metric,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Seeds triple sampling and the optimizers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ratios above 1 + tol count as violations.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Comma-separated complex metrics.
    #[arg(long, default_value = "chord,dissimilarity,finsler")]
    pub metrics: String,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "2,1")]
    pub space: String,
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 0.01)]
    pub spread: f64,
    #[arg(long, default_value = "single")]
    pub linkage: Linkage,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<UsageError>()
            || matches!(
                cause.downcast_ref::<finsler_wps::Error>(),
                Some(finsler_wps::Error::InvalidOption(_))
            )
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Normalize(a) => commands::normalize(a),
        Command::Height(a) => commands::height(a),
        Command::Dist(a) => commands::dist(a),
        Command::Matrix(a) => commands::matrix(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Cut(a) => commands::cut(a),
        Command::Pca(a) => commands::pca(a),
        Command::ScanTriangle(a) => commands::scan_triangle(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
