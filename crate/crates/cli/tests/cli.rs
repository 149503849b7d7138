use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use farmlayout::io::{read_layout_file, read_rose_file, write_layout_file, write_rose_file};
use farmlayout::windrose::SyntheticRose;
use farmlayout::{compute_aep, EvaluationReport, Point, TurbineSpec, WakeModelConfig};
use sha2::{Digest, Sha256};

fn farmlayout(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_farmlayout"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = farmlayout(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Problem over a `size` m square with the synthetic rose.
fn problem(dir: &Path, size: f64, extra: serde_json::Value) -> PathBuf {
    write_rose_file(&dir.join("rose.csv"), &SyntheticRose::default().build().unwrap()).unwrap();
    let mut body = serde_json::json!({
        "boundary": [[0, 0], [size, 0], [size, size], [0, size]],
        "rose": "rose.csv",
    });
    for (k, v) in extra.as_object().unwrap() {
        body[k] = v.clone();
    }
    let path = dir.join("problem.json");
    fs::write(&path, serde_json::to_string(&body).unwrap()).unwrap();
    path
}

fn verify_manifest(dir: &Path) -> serde_json::Value {
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    for input in manifest["inputs"].as_array().unwrap() {
        let bytes = fs::read(input["path"].as_str().unwrap()).unwrap();
        assert_eq!(input["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    for name in manifest["outputs"].as_array().unwrap() {
        assert!(dir.join(name.as_str().unwrap()).exists(), "{name}");
    }
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    manifest
}

fn six_hourly_series(path: &Path, directions: impl Fn(usize) -> f64, n: usize) {
    let mut body = String::from("timestamp,speed,direction\n");
    for i in 0..n {
        let hour = i * 6;
        body.push_str(&format!(
            "2000-01-{:02}T{:02}:00,{},{}\n",
            1 + hour / 24 % 28,
            hour % 24,
            6.0 + (i % 7) as f64,
            directions(i)
        ));
    }
    fs::write(path, body).unwrap();
}

#[test]
fn capacity_reports_turbine_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["capacity", "--area", "179.3", "--density", "3.5", "--rating", "15", "--out", s(dir.path())]);
    assert!(out.contains("627.55 MW"), "{out}");
    assert!(out.contains("turbines: 41 "), "{out}");
    let five = ok(&["capacity", "--area", "179.3", "--rating", "5", "--out", s(dir.path())]);
    assert!(five.contains("turbines: 125 "), "{five}");
    let unit = ok(&["capacity", "--area", "1", "--density", "3.5", "--rating", "3.5", "--out", s(dir.path())]);
    assert!(unit.contains("turbines: 1 "), "{unit}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("capacity.json")).unwrap()).unwrap();
    assert_eq!(report["n_turbines"], 1);
    verify_manifest(dir.path());
}

#[test]
fn windrose_from_nnw_series() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    // two thirds of the samples from 330-340°, the rest spread around
    six_hourly_series(&series, |i| if i % 3 == 0 { (i * 37 % 360) as f64 } else { 330.0 + (i % 10) as f64 }, 4 * 365);
    let out_dir = dir.path().join("out");
    ok(&["windrose", "--input", s(&series), "--render", "--out", s(&out_dir)]);
    let rose = read_rose_file(&out_dir.join("rose.csv")).unwrap();
    let total: f64 = rose.bins().iter().map(|b| b.frequency).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!((325.0..=345.0).contains(&rose.dominant_bin().center_deg));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("rose_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["dominant_center_deg"], 335.0);
    assert_eq!(summary["samples"], 4 * 365);
    assert!(out_dir.join("rose.svg").exists());
    let manifest = verify_manifest(&out_dir);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 1);
}

#[test]
fn windrose_single_sample_fills_one_bin() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("one.csv");
    fs::write(&series, "timestamp,u100,v100\n2000-01-01T00:00,0,-8\n").unwrap();
    ok(&["windrose", "--input", s(&series), "--out", s(dir.path())]);
    let rose = read_rose_file(&dir.path().join("rose.csv")).unwrap();
    let nonzero: Vec<_> = rose.bins().iter().filter(|b| b.frequency > 0.0).collect();
    assert_eq!(nonzero.len(), 1);
    assert_eq!(nonzero[0].center_deg, 5.0);
    // 8 m/s at 100 m carried to 150 m
    assert!((nonzero[0].mean_speed - 8.0 * 1.5f64.powf(0.15)).abs() < 1e-12);
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("bad.csv");
    fs::write(&series, "timestamp,speed,direction\nt0,5,10\nt1,five,20\n").unwrap();
    let out = farmlayout(&["windrose", "--input", s(&series), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let header = dir.path().join("header.csv");
    fs::write(&header, "time,a,b\nt0,1,2\n").unwrap();
    assert_eq!(farmlayout(&["windrose", "--input", s(&header), "--out", s(dir.path())]).status.code(), Some(2));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), 4000.0, serde_json::json!({"optimizer": {"n_starts": "many"}}));
    let out = farmlayout(&["optimize", "--problem", s(&p), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("optimizer.n_starts"), "{err}");
}

#[test]
fn evaluate_single_turbine_has_no_loss() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), 4000.0, serde_json::json!({}));
    let layout = dir.path().join("one.csv");
    write_layout_file(&layout, &[Point::new(2000.0, 2000.0)]).unwrap();
    let out_dir = dir.path().join("eval");
    ok(&["evaluate", "--problem", s(&p), "--layout", s(&layout), "--render", "--out", s(&out_dir)]);
    let report: EvaluationReport =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.wake_loss, 0.0);
    assert_eq!(report.n_turbines, 1);
    let rows = fs::read_to_string(out_dir.join("per_direction.csv")).unwrap();
    assert_eq!(rows.lines().count(), 37);
    let manifest = verify_manifest(&out_dir);
    // problem file, rose and layout
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 3);
}

#[test]
fn optimize_smoke_emits_every_file_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), 5000.0, serde_json::json!({"n_turbines": 6}));
    let out_dir = dir.path().join("opt");
    ok(&[
        "optimize", "--problem", s(&p), "--starts", "1", "--iterations", "1", "--render", "--out", s(&out_dir),
    ]);
    for f in [
        "layout.csv",
        "report.json",
        "history.csv",
        "starts.csv",
        "initial_layouts.csv",
        "final_layouts.csv",
        "layout.svg",
        "manifest.json",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    verify_manifest(&out_dir);

    // the report re-derives exactly from the written layout
    let layout = read_layout_file(&out_dir.join("layout.csv")).unwrap();
    let report: EvaluationReport =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let rose = read_rose_file(&dir.path().join("rose.csv")).unwrap();
    let again = compute_aep(&layout, &TurbineSpec::reference_15mw(), &rose, &WakeModelConfig::default()).unwrap();
    assert_eq!(report, again);

    let history = fs::read_to_string(out_dir.join("history.csv")).unwrap();
    assert_eq!(history.lines().next().unwrap(), "start,sequence,iteration,objective,penalty_weight,wake_spread,accepted");
    assert_eq!(history.lines().count(), 1 + 3);
}

#[test]
fn optimize_is_deterministic_and_honours_threads() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), 5000.0, serde_json::json!({"n_turbines": 5}));
    let run = |name: &str, threads: &str| {
        let out_dir = dir.path().join(name);
        ok(&[
            "optimize", "--problem", s(&p), "--starts", "3", "--iterations", "4", "--seed", "9", "--threads", threads,
            "--out", s(&out_dir),
        ]);
        fs::read(out_dir.join("layout.csv")).unwrap()
    };
    assert_eq!(run("a", "1"), run("b", "2"));
    let env = Command::new(env!("CARGO_BIN_EXE_farmlayout"))
        .env("FARMLAYOUT_THREADS", "1")
        .args(["capacity", "--area", "1", "--out", s(&dir.path().join("c"))])
        .output()
        .unwrap();
    assert!(env.status.success());
}

#[test]
fn impossible_problem_exits_with_optimization_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), 300.0, serde_json::json!({"n_turbines": 30}));
    let out = farmlayout(&["optimize", "--problem", s(&p), "--starts", "2", "--iterations", "1", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flowfield_and_compare_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), 3000.0, serde_json::json!({}));
    let layout = dir.path().join("pair.csv");
    write_layout_file(&layout, &[Point::new(1500.0, 2500.0), Point::new(1500.0, 500.0)]).unwrap();

    let ff = dir.path().join("ff");
    ok(&[
        "flowfield", "--problem", s(&p), "--layout", s(&layout), "--direction", "0", "--speed", "10",
        "--cell-size", "250", "--margin", "500", "--render", "--out", s(&ff),
    ]);
    let csv = fs::read_to_string(ff.join("flowfield.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,speed"));
    let speeds: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    // 3000 + 2 * 500 span at 250 m -> 17 x 17
    assert_eq!(speeds.len(), 17 * 17);
    assert!(speeds.iter().all(|&u| (0.0..=10.0).contains(&u)));
    assert!(speeds.iter().any(|&u| u < 9.0));
    assert!(ff.join("flowfield.svg").exists());
    verify_manifest(&ff);

    let cmp = dir.path().join("cmp");
    ok(&["compare", "--problem", s(&p), "--layout", s(&layout), "--out", s(&cmp)]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(cmp.join("compare.json")).unwrap()).unwrap();
    let gap = v["relative_gap"].as_f64().unwrap();
    let (b, j) = (v["aep_bastankhah"].as_f64().unwrap(), v["aep_jensen"].as_f64().unwrap());
    assert!(((b - j).abs() / b - gap).abs() < 1e-12);
    verify_manifest(&cmp);
}
