use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use anyhow::{Context, Result};
use finsler_wps::cluster::{
    adjusted_rand_index, agglomerate, cut as cut_tree, distance_matrix, kmeans_baseline, rand_index, Cut, Dendrogram,
    DistanceMatrix,
};
use finsler_wps::datasets::{gen_moduli_points, gen_synthetic_clusters};
use finsler_wps::io::{format_float, PointSet};
use finsler_wps::pca::{normalize_dataset, weighted_pca};
use finsler_wps::scaling::triangle_violation_scan;
use finsler_wps::{ProjPoint, Weights};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::metric::{parse_metric_list, Oracle};
use crate::output::{csv_header, newick_header, read_input, stamp, to_json_string, write_output};
use crate::{
    BenchArgs, ClusterArgs, CutArgs, CutOptions, DistArgs, GenArgs, GenKind, HeightArgs, MatrixArgs, NormalizeArgs,
    PcaArgs, ScanArgs, UsageError,
};

/// The resolved configuration of one run, logged and embedded in outputs.
fn config<T: Serialize>(command: &str, args: &T) -> Result<Value> {
    let mut value = serde_json::to_value(args)?;
    if let Value::Object(map) = &mut value {
        map.insert("command".into(), command.into());
    }
    info!("{command}: resolved config {value}");
    Ok(value)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_points(path: &Path) -> Result<PointSet> {
    let text = read_input(path)?;
    let set = if is_csv(path) {
        PointSet::from_csv_str(&text)
    } else {
        PointSet::from_json_str(&text)
    };
    set.with_context(|| format!("parsing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_input(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_weights(s: &str) -> Result<Weights> {
    s.parse()
        .map_err(|e: finsler_wps::Error| UsageError::new(format!("--space: {e}")).into())
}

/// Point set rendered for `path`: CSV for `.csv`, JSON otherwise, with
/// `extra` fields merged into the JSON form.
fn render_points(set: &PointSet, path: Option<&Path>, config: &Value, extra: Value) -> Result<String> {
    if path.is_some_and(is_csv) {
        return Ok(format!("{}\n{}", csv_header(config), set.to_csv_string()));
    }
    let mut value = set.to_json_value();
    if let (Value::Object(map), Value::Object(more)) = (&mut value, extra) {
        map.extend(more);
    }
    to_json_string(&stamp(value, config))
}

fn render_partition(labels: &[usize], config: &Value) -> String {
    let mut out = csv_header(config);
    out.push_str("\nindex,label\n");
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    out
}

fn cut_criterion(opts: &CutOptions) -> Option<Cut> {
    match (opts.cut_k, opts.cut_height) {
        (Some(k), _) => Some(Cut::K(k)),
        (None, Some(h)) => Some(Cut::Height(h)),
        (None, None) => None,
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building the thread pool")
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let config = config("gen", args)?;
    let (set, labels, meta) = match args.kind {
        GenKind::Synthetic => {
            let q = parse_weights(&args.space)?;
            let data = gen_synthetic_clusters(&q, args.clusters, args.per_cluster, args.spread, args.seed)?;
            let set = PointSet::Complex {
                weights: q,
                points: data.points,
            };
            (set, data.labels, data.meta)
        }
        GenKind::Moduli => {
            let data = gen_moduli_points(args.count, args.height_bound, args.seed)?;
            let set = PointSet::Rational {
                weights: data.points[0].weights().clone(),
                points: data.points,
            };
            (set, data.labels, data.meta)
        }
    };
    info!("gen: {} points", set.len());
    let extra = json!({ "labels": labels, "meta": meta });
    write_output(
        args.output.as_deref(),
        &render_points(&set, args.output.as_deref(), &config, extra)?,
    )?;
    if let Some(path) = &args.labels {
        write_output(Some(path), &render_partition(&labels, &config))?;
    }
    Ok(())
}

pub fn normalize(args: &NormalizeArgs) -> Result<()> {
    let config = config("normalize", args)?;
    let set = read_points(&args.input)?;
    let normalized = normalize_dataset(&set, args.mode)?;
    write_output(
        args.output.as_deref(),
        &render_points(&normalized, args.output.as_deref(), &config, json!({}))?,
    )
}

pub fn height(args: &HeightArgs) -> Result<()> {
    let config = config("height", args)?;
    let PointSet::Rational { points, .. } = read_points(&args.input)? else {
        return Err(UsageError::new("heights need integer points").into());
    };
    let mut out = csv_header(&config);
    out.push_str("\nindex,wgcd,height\n");
    for (i, p) in points.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", p.wgcd(), format_float(p.weighted_height())));
    }
    write_output(args.output.as_deref(), &out)
}

pub fn dist(args: &DistArgs) -> Result<()> {
    let config = config("dist", args)?;
    args.opt.validate()?;
    let oracle = Oracle::new(args.metric, read_points(&args.input)?, &args.opt, args.seed)?;
    oracle.check_index(args.i)?;
    oracle.check_index(args.j)?;
    let geodesic = oracle.geodesic(args.i, args.j)?;
    let distance = match &geodesic {
        Some(g) => g.distance,
        None => oracle.distance(args.i, args.j)?,
    };
    println!("{}", format_float(distance));
    if let Some(path) = &args.output {
        let result = json!({
            "metric": args.metric,
            "i": args.i,
            "j": args.j,
            "distance": distance,
            "geodesic": geodesic.map(|g| g.to_json()),
        });
        write_output(Some(path), &to_json_string(&stamp(result, &config))?)?;
    }
    Ok(())
}

fn oracle_matrix(oracle: &Oracle, threads: usize, counter: Option<&AtomicUsize>) -> Result<DistanceMatrix> {
    let indices: Vec<usize> = (0..oracle.len()).collect();
    let m = distance_matrix(
        &indices,
        |&i, &j| {
            if let Some(c) = counter {
                c.fetch_add(1, Ordering::Relaxed);
            }
            oracle.distance(i, j)
        },
        threads,
    )?;
    Ok(m)
}

pub fn matrix(args: &MatrixArgs) -> Result<()> {
    let config = config("matrix", args)?;
    args.opt.validate()?;
    let oracle = Oracle::new(args.metric, read_points(&args.input)?, &args.opt, args.seed)?;
    let start = Instant::now();
    let m = oracle_matrix(&oracle, args.threads, None)?;
    info!(
        "matrix: {} pairs in {:.3?}",
        oracle.len() * (oracle.len() - 1) / 2,
        start.elapsed()
    );
    let mut value = serde_json::to_value(&m)?;
    value["metric"] = json!(args.metric);
    write_output(args.output.as_deref(), &to_json_string(&stamp(value, &config))?)
}

fn write_cut(d: &Dendrogram, criterion: Cut, path: Option<&Path>, config: &Value) -> Result<()> {
    let labels = cut_tree(d, criterion)?;
    info!("cut: {} clusters", labels.iter().max().map_or(0, |m| m + 1));
    write_output(path, &render_partition(&labels, config))
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    let config = config("cluster", args)?;
    let m: DistanceMatrix = read_json(&args.input)?;
    let criterion = cut_criterion(&args.cut);
    let d = agglomerate(&m, args.linkage);
    let tree = to_json_string(&stamp(serde_json::to_value(&d)?, &config))?;
    if let Some(path) = &args.dendrogram {
        write_output(Some(path), &tree)?;
    }
    if let Some(path) = &args.newick {
        let text = format!("{}{}\n", newick_header(&config), d.to_newick(None));
        write_output(Some(path), &text)?;
    }
    match criterion {
        Some(c) => write_cut(&d, c, args.output.as_deref(), &config),
        None => write_output(args.output.as_deref(), &tree),
    }
}

pub fn cut(args: &CutArgs) -> Result<()> {
    let config = config("cut", args)?;
    let d: Dendrogram = read_json(&args.input)?;
    let criterion = cut_criterion(&args.cut).ok_or_else(|| UsageError::new("give --cut-k or --cut-height"))?;
    write_cut(&d, criterion, args.output.as_deref(), &config)
}

pub fn pca(args: &PcaArgs) -> Result<()> {
    let config = config("pca", args)?;
    let points: Vec<ProjPoint> = match read_points(&args.input)? {
        PointSet::Complex { points, .. } => points,
        PointSet::Rational { points, .. } => points.iter().map(|p| p.to_proj_point()).collect(),
    };
    let result = weighted_pca(&points, args.k, !args.no_center)?;
    write_output(
        args.output.as_deref(),
        &to_json_string(&stamp(result.to_json(), &config))?,
    )
}

pub fn scan_triangle(args: &ScanArgs) -> Result<()> {
    let config = config("scan-triangle", args)?;
    args.opt.validate()?;
    if !(args.tol >= 0.0) {
        return Err(UsageError::new("--tol must be nonnegative").into());
    }
    let oracle = Oracle::new(args.metric, read_points(&args.input)?, &args.opt, args.seed)?;
    let indices: Vec<usize> = (0..oracle.len()).collect();
    let report = thread_pool(args.threads)?.install(|| {
        triangle_violation_scan(
            &indices,
            |&i, &j| oracle.distance(i, j),
            args.trials,
            args.seed,
            args.tol,
        )
    })?;
    info!(
        "scan-triangle: max ratio {} over {} trials, {} violations",
        format_float(report.max_ratio),
        report.trials,
        report.violations.len()
    );
    let mut value = serde_json::to_value(&report)?;
    value["metric"] = json!(args.metric);
    write_output(args.output.as_deref(), &to_json_string(&stamp(value, &config))?)
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let config = config("bench", args)?;
    args.opt.validate()?;
    let metrics = parse_metric_list(&args.metrics)?;
    if let Some(m) = metrics.iter().find(|m| m.is_rational()) {
        return Err(UsageError::new(format!("bench runs on complex points; {m} is not supported")).into());
    }
    if args.n < 2 || args.clusters == 0 || args.clusters > args.n {
        return Err(UsageError::new("bench needs n >= 2 and 1 <= clusters <= n").into());
    }
    let q = parse_weights(&args.space)?;
    let per_cluster = args.n.div_ceil(args.clusters);
    let mut data = gen_synthetic_clusters(&q, args.clusters, per_cluster, args.spread, args.seed)?;
    data.points.truncate(args.n);
    data.labels.truncate(args.n);
    let set = PointSet::Complex {
        weights: q,
        points: data.points.clone(),
    };

    let mut runs = Vec::new();
    let mut partitions: Vec<(String, Vec<usize>)> = Vec::new();
    for &metric in &metrics {
        let oracle = Oracle::new(metric, set.clone(), &args.opt, args.seed)?;
        let counter = AtomicUsize::new(0);
        let start = Instant::now();
        let m = oracle_matrix(&oracle, args.threads, Some(&counter))?;
        let wall = start.elapsed().as_secs_f64();
        let labels = cut_tree(&agglomerate(&m, args.linkage), Cut::K(args.clusters))?;
        let evaluations = counter.load(Ordering::Relaxed);
        info!("bench: {metric} {evaluations} evaluations in {wall:.3}s");
        runs.push(json!({
            "metric": metric,
            "evaluations": evaluations,
            "wall_time_s": wall,
            "rand_vs_truth": rand_index(&labels, &data.labels)?,
            "ari_vs_truth": adjusted_rand_index(&labels, &data.labels)?,
        }));
        partitions.push((metric.to_string(), labels));
    }

    let embedding: Vec<Vec<f64>> = data
        .points
        .iter()
        .map(|p| {
            let z = p.normalize_geometric();
            z.coords().iter().flat_map(|c| [c.re, c.im]).collect()
        })
        .collect();
    let start = Instant::now();
    let kmeans = kmeans_baseline(&embedding, args.clusters, args.seed)?;
    let kmeans_wall = start.elapsed().as_secs_f64();
    let baseline = json!({
        "method": "kmeans",
        "wall_time_s": kmeans_wall,
        "rand_vs_truth": rand_index(&kmeans, &data.labels)?,
        "ari_vs_truth": adjusted_rand_index(&kmeans, &data.labels)?,
    });
    partitions.push(("kmeans".into(), kmeans));

    let mut agreement = Vec::new();
    for (a, (name_a, la)) in partitions.iter().enumerate() {
        for (name_b, lb) in &partitions[a + 1..] {
            agreement.push(json!({
                "a": name_a,
                "b": name_b,
                "rand": rand_index(la, lb)?,
                "ari": adjusted_rand_index(la, lb)?,
            }));
        }
    }
    let report = json!({
        "n": args.n,
        "pairs": args.n * (args.n - 1) / 2,
        "clusters": args.clusters,
        "linkage": args.linkage,
        "metrics": runs,
        "baseline": baseline,
        "agreement": agreement,
    });
    write_output(args.output.as_deref(), &to_json_string(&stamp(report, &config))?)
}
