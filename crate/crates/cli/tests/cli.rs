use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use finsler_wps::cluster::canonical_labels;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler-wps"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// `index,label` rows, skipping comments and the header.
fn read_partition(p: &Path) -> Vec<usize> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && *l != "index,label")
        .enumerate()
        .map(|(k, l)| {
            let (i, label) = l.split_once(',').unwrap();
            assert_eq!(i.parse::<usize>().unwrap(), k);
            label.parse().unwrap()
        })
        .collect()
}

#[test]
fn repeated_point_has_zero_finsler_distance() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "pts.json");
    fs::write(
        &input,
        r#"{"weights":[2,1],"points":[{"re":[0.3,-0.7],"im":[0.2,0.1]},{"re":[0.3,-0.7],"im":[0.2,0.1]}]}"#,
    )
    .unwrap();
    for metric in ["finsler", "chord", "dissimilarity"] {
        let out = run_ok(&["dist", s(&input), "--metric", metric]);
        let d: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
        assert!(d.abs() <= 1e-9, "{metric}: {d}");
    }
}

#[test]
fn matrix_then_cluster_recovers_synthetic_labels() {
    let dir = TempDir::new().unwrap();
    let (pts, truth, m, part) = (
        path(&dir, "pts.json"),
        path(&dir, "truth.csv"),
        path(&dir, "m.json"),
        path(&dir, "part.csv"),
    );
    run_ok(&[
        "gen",
        "--space",
        "2,1",
        "--clusters",
        "3",
        "--per-cluster",
        "12",
        "--spread",
        "0.01",
        "--seed",
        "5",
        "-o",
        s(&pts),
        "--labels",
        s(&truth),
    ]);
    let truth = read_partition(&truth);
    assert_eq!(read_json(&pts)["labels"].as_array().unwrap().len(), 36);
    for (metric, extra) in [
        ("chord", vec![]),
        (
            "finsler",
            vec!["--segments", "4", "--iters", "40", "--multistarts", "1"],
        ),
    ] {
        let mut args = vec!["matrix", s(&pts), "--metric", metric, "-o", s(&m)];
        args.extend(extra);
        run_ok(&args);
        run_ok(&["cluster", s(&m), "--linkage", "single", "--cut-k", "3", "-o", s(&part)]);
        let labels = read_partition(&part);
        assert_eq!(canonical_labels(&labels), canonical_labels(&truth), "{metric}");
    }
}

#[test]
fn cut_of_saved_dendrogram_matches_cluster() {
    let dir = TempDir::new().unwrap();
    let (pts, m, tree, nwk, a, b) = (
        path(&dir, "pts.csv"),
        path(&dir, "m.json"),
        path(&dir, "tree.json"),
        path(&dir, "tree.nwk"),
        path(&dir, "a.csv"),
        path(&dir, "b.csv"),
    );
    run_ok(&[
        "gen",
        "--clusters",
        "4",
        "--per-cluster",
        "5",
        "--seed",
        "2",
        "-o",
        s(&pts),
    ]);
    run_ok(&["matrix", s(&pts), "--metric", "dissimilarity", "-o", s(&m)]);
    run_ok(&[
        "cluster",
        s(&m),
        "--linkage",
        "average",
        "--cut-height",
        "0.5",
        "--dendrogram",
        s(&tree),
        "--newick",
        s(&nwk),
        "-o",
        s(&a),
    ]);
    run_ok(&["cut", s(&tree), "--cut-height", "0.5", "-o", s(&b)]);
    assert_eq!(read_partition(&a), read_partition(&b));
    let tree = read_json(&tree);
    assert_eq!(tree["n_leaves"], 20);
    assert_eq!(tree["merges"].as_array().unwrap().len(), 19);
    let newick = fs::read_to_string(&nwk).unwrap();
    assert!(newick.starts_with("[finsler-wps "));
    assert!(newick.trim_end().ends_with(';'));
}

#[test]
fn bench_counts_every_pair_once() {
    let dir = TempDir::new().unwrap();
    let report = path(&dir, "bench.json");
    run_ok(&[
        "bench",
        "--metrics",
        "chord,finsler",
        "--n",
        "50",
        "--segments",
        "4",
        "--iters",
        "30",
        "--multistarts",
        "1",
        "-o",
        s(&report),
    ]);
    let report = read_json(&report);
    let runs = report["metrics"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    for r in runs {
        assert_eq!(r["evaluations"], 1225);
        assert!(r["wall_time_s"].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(report["pairs"], 1225);
    let agreement = report["agreement"].as_array().unwrap();
    assert_eq!(agreement.len(), 3);
    for a in agreement {
        let rand = a["rand"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&rand));
    }
}

#[test]
fn outputs_are_bitwise_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let pts = path(&dir, "pts.json");
    run_ok(&[
        "gen",
        "--space",
        "1,2,3",
        "--clusters",
        "2",
        "--per-cluster",
        "6",
        "--spread",
        "0.3",
        "-o",
        s(&pts),
    ]);
    for metric in ["dissimilarity", "finsler"] {
        let outputs: Vec<Vec<u8>> = ["1", "3"]
            .iter()
            .map(|threads| {
                let m = path(&dir, &format!("m-{metric}-{threads}.json"));
                run_ok(&[
                    "matrix",
                    s(&pts),
                    "--metric",
                    metric,
                    "--threads",
                    threads,
                    "--segments",
                    "4",
                    "--iters",
                    "30",
                    "-o",
                    s(&m),
                ]);
                fs::read(&m).unwrap()
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{metric}");
    }
    let scans: Vec<Vec<u8>> = ["1", "2"]
        .iter()
        .map(|threads| {
            let r = path(&dir, &format!("scan-{threads}.json"));
            run_ok(&[
                "scan-triangle",
                s(&pts),
                "--metric",
                "dissimilarity",
                "--trials",
                "40",
                "--seed",
                "3",
                "--threads",
                threads,
                "-o",
                s(&r),
            ]);
            fs::read(&r).unwrap()
        })
        .collect();
    assert_eq!(scans[0], scans[1]);
}

#[test]
fn outputs_embed_version_and_config() {
    let dir = TempDir::new().unwrap();
    let (pts, m, part) = (path(&dir, "pts.json"), path(&dir, "m.json"), path(&dir, "part.csv"));
    run_ok(&["gen", "--per-cluster", "3", "--seed", "11", "-o", s(&pts)]);
    run_ok(&["matrix", s(&pts), "--metric", "chord", "-o", s(&m)]);
    run_ok(&["cluster", s(&m), "--cut-k", "2", "-o", s(&part)]);
    for file in [&pts, &m] {
        let v = read_json(file);
        assert_eq!(v["tool"]["version"], env!("CARGO_PKG_VERSION"));
        assert!(v["config"]["command"].is_string());
    }
    assert_eq!(read_json(&pts)["config"]["seed"], 11);
    assert_eq!(read_json(&m)["config"]["metric"], "chord");
    let text = fs::read_to_string(&part).unwrap();
    assert!(text.starts_with(&format!("# finsler-wps {}\n# config: ", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn floats_are_written_with_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    let (pts, m) = (path(&dir, "pts.json"), path(&dir, "m.json"));
    run_ok(&["gen", "--per-cluster", "2", "-o", s(&pts)]);
    run_ok(&["matrix", s(&pts), "--metric", "chord", "-o", s(&m)]);
    let text = fs::read_to_string(&m).unwrap();
    let entries = text.split("\"entries\":[").nth(1).unwrap();
    let first = entries.trim_start_matches('[').split([',', ']']).next().unwrap();
    assert_eq!(first, "0.0000000000000000e0");
}

#[test]
fn rational_pipeline() {
    let dir = TempDir::new().unwrap();
    let (pts, heights, norm) = (path(&dir, "mod.csv"), path(&dir, "h.csv"), path(&dir, "n.json"));
    run_ok(&[
        "gen",
        "--kind",
        "moduli",
        "--count",
        "25",
        "--height-bound",
        "3",
        "--seed",
        "1",
        "-o",
        s(&pts),
    ]);
    run_ok(&["height", s(&pts), "-o", s(&heights)]);
    let rows: Vec<(u64, f64)> = fs::read_to_string(&heights)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && *l != "index,wgcd,height")
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|&(g, h)| g == 1 && h <= 3.0 + 1e-12));

    run_ok(&["normalize", s(&pts), "--mode", "rational", "-o", s(&norm)]);
    assert_eq!(read_json(&norm)["points"].as_array().unwrap().len(), 25);
    let out = run_ok(&[
        "dist",
        s(&pts),
        "--metric",
        "rational-dissimilarity",
        "--i",
        "3",
        "--j",
        "3",
    ]);
    let d: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert_eq!(d, 0.0);
    run_ok(&["pca", s(&pts), "--k", "2", "--no-center"]);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let pts = path(&dir, "pts.json");
    run_ok(&["gen", "--per-cluster", "2", "-o", s(&pts)]);
    for args in [
        vec!["frobnicate"],
        vec!["dist", s(&pts), "--metric", "finsler", "--bogus"],
        vec!["dist", s(&pts), "--metric", "taxicab"],
        vec!["dist", s(&pts), "--metric", "rational-finsler"],
        vec!["dist", s(&pts), "--metric", "chord", "--j", "99"],
        vec!["dist", s(&pts), "--metric", "finsler", "--segments", "1"],
        vec!["pca", s(&pts), "--k", "5"],
        vec!["cut", s(&pts)],
        vec!["bench", "--metrics", "rational-finsler"],
    ] {
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn computation_errors_exit_with_one_and_keep_old_output() {
    let dir = TempDir::new().unwrap();
    let (bad, m) = (path(&dir, "bad.csv"), path(&dir, "m.json"));
    fs::write(&bad, "# weights: 2 1\n1,0,0,0\n1,zero,0,0\n").unwrap();
    fs::write(&m, "previous").unwrap();
    let out = run(&["matrix", s(&bad), "--metric", "chord", "-o", s(&m)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
    assert_eq!(fs::read_to_string(&m).unwrap(), "previous");

    let out = run(&["matrix", s(&path(&dir, "missing.json")), "--metric", "chord"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        fs::read_dir(dir.path()).unwrap().count() == 2,
        "no stray temporary files"
    );
}
