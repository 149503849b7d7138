use std::fs;
use std::path::Path;

use farmlayout::io::{
    read_layout, read_rose_file, read_turbine, write_json, write_layout, write_rose_file, write_turbine, Problem,
};
use farmlayout::windrose::SyntheticRose;
use farmlayout::{FarmError, Point, TurbineSpec, WakeModel};
use proptest::prelude::*;

fn write_problem(dir: &Path, body: serde_json::Value) -> std::path::PathBuf {
    let path = dir.join("problem.json");
    fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    path
}

#[test]
fn problem_resolves_relative_inputs_and_derives_count() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    write_rose_file(&dir.path().join("data/rose.csv"), &SyntheticRose::default().build().unwrap()).unwrap();
    write_turbine(&dir.path().join("data/turbine.json"), &TurbineSpec::reference_15mw()).unwrap();
    let path = write_problem(
        dir.path(),
        serde_json::json!({
            "boundary": [[0, 0], [13400, 0], [13400, 13380], [0, 13380]],
            "turbine": "data/turbine.json",
            "rose": "data/rose.csv",
            "wake": {"model": "jensen", "k": 0.04},
            "optimizer": {"n_starts": 4}
        }),
    );
    let problem = Problem::load(&path).unwrap();
    assert_eq!(problem.n_turbines, 41);
    assert_eq!(problem.wake.model, WakeModel::Jensen);
    assert_eq!(problem.wake.k_jensen, 0.04);
    assert_eq!(problem.wake.k_star, 0.025);
    assert_eq!(problem.optimizer.n_starts, 4);
    assert_eq!(problem.optimizer.n_iterations, 70);
    assert_eq!(problem.inputs.len(), 3);
    assert_eq!(problem.turbine.rated_power(), 15.0);
}

#[test]
fn problem_schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    write_rose_file(&dir.path().join("rose.csv"), &SyntheticRose::default().build().unwrap()).unwrap();
    let path = write_problem(
        dir.path(),
        serde_json::json!({
            "boundary": [[0, 0], [1000, 0], [1000, 1000]],
            "rose": "rose.csv",
            "wake": {"model": "park"}
        }),
    );
    match Problem::load(&path) {
        Err(FarmError::Schema { field, .. }) => assert_eq!(field, "wake.model"),
        other => panic!("unexpected {other:?}"),
    }
    let path = write_problem(
        dir.path(),
        serde_json::json!({"boundary": [[0, 0], [1000, 0], [1000, 1000]], "rose": "rose.csv", "extra": 1}),
    );
    assert!(matches!(Problem::load(&path), Err(FarmError::Schema { .. })));
}

#[test]
fn turbine_and_rose_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = TurbineSpec::reference_15mw();
    let t = dir.path().join("t.json");
    write_turbine(&t, &spec).unwrap();
    assert_eq!(read_turbine(&t).unwrap().data(), spec.data());

    let rose = SyntheticRose::default().build().unwrap();
    let r = dir.path().join("r.csv");
    write_rose_file(&r, &rose).unwrap();
    assert_eq!(read_rose_file(&r).unwrap(), rose);
    let text = fs::read_to_string(&r).unwrap();
    assert!(text.starts_with("center_deg,frequency,mean_speed_ms\n"));
    assert_eq!(text.lines().count(), 37);

    let j = dir.path().join("x.json");
    write_json(&j, &rose).unwrap();
    assert!(fs::read_to_string(&j).unwrap().contains("mean_speed"));
}

#[test]
fn malformed_rows_report_their_line() {
    let bad = "x_m,y_m\n1,2\n3,oops\n";
    let err = read_layout(bad.as_bytes(), Path::new("layout.csv")).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

proptest! {
    #[test]
    fn layout_csv_round_trips_exactly(pts in prop::collection::hash_set((-1e6f64..1e6, -1e6f64..1e6).prop_map(|(x, y)| (x.to_bits(), y.to_bits())), 1..40)) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(f64::from_bits(x), f64::from_bits(y))).collect();
        let mut buf = Vec::new();
        write_layout(&mut buf, &pts).unwrap();
        let back = read_layout(buf.as_slice(), Path::new("mem")).unwrap();
        prop_assert_eq!(back.positions(), pts.as_slice());
    }
}
