use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TWO_POINTS_2D: &str = r#"{"dimension": 2, "metric": "euclidean", "sites": [
  {"id": "a", "primitives": [{"type": "point", "coords": [-1, 0]}]},
  {"id": "b", "primitives": [{"type": "point", "coords": [1, 0]}]}]}"#;

const TWO_POINTS_3D: &str = r#"{"dimension": 3, "sites": [
  {"id": "a", "primitives": [{"type": "point", "coords": [-1, 0, 0]}]},
  {"id": "b", "primitives": [{"type": "point", "coords": [1, 0, 0]}]}]}"#;

const TAXICAB: &str = r#"{"dimension": 2, "metric": "taxicab", "sites": [
  {"id": "a", "primitives": [{"type": "point", "coords": [0, 0]}]},
  {"id": "b", "primitives": [{"type": "point", "coords": [1, 1]}]}]}"#;

fn conflict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conflict")).args(args).output().expect("binary runs")
}

fn write_scene(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn extract_two_points_emits_the_bisector() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "two.json", TWO_POINTS_2D);
    let out = conflict(&["extract", "--scene", &scene, "--window", "-2,2,-2,2", "--res", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("vx,vy,residual,pair_i,pair_j,polyline_id"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r[0].abs() < 1e-9));

    let base = dir.path().join("bis");
    let out = conflict(&["extract", "--scene", &scene, "--res", "32", "--out", base.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("bis.csv").exists());
    assert!(dir.path().join("bis.json").exists());
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let two = write_scene(dir.path(), "two.json", TWO_POINTS_2D);
    let two3 = write_scene(dir.path(), "two3.json", TWO_POINTS_3D);
    let taxi = write_scene(dir.path(), "taxi.json", TAXICAB);
    let broken = write_scene(dir.path(), "broken.json", "{\"dimension\": 2, \"sites\": [");
    let missing = dir.path().join("missing.json");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["--help"], 0),
        (vec!["no-such-command"], 2),
        (vec!["extract", "--scene", &two, "--frobnicate"], 2),
        (vec!["extract"], 2),
        (vec!["extract", "--scene", missing.to_str().unwrap()], 2),
        (vec!["extract", "--scene", &broken], 2),
        (vec!["extract", "--scene", &two, "--window", "0,1"], 2),
        (vec!["extract", "--scene", &two, "--res", "2"], 2),
        (vec!["verify-tangent", "--scene", &two, "--at", "0,0", "--eps", "0.4,0.2,0.1"], 0),
        (vec!["verify-tangent", "--scene", &two, "--at", "0,0", "--eps", "0.1,0.2"], 2),
        (vec!["verify-tangent", "--scene", &two, "--at", "0,0", "--tol", "0"], 2),
        (vec!["verify-tangent", "--scene", &two, "--at", "0,0,0"], 2),
        (vec!["supports", "--scene", &two, "--at", "0,0"], 0),
        (vec!["sphere-conf", "--scene", &two3, "--at", "0,0,0", "--res", "2"], 0),
        (vec!["no-cusp", "--scene", &two, "--at", "0,0"], 0),
        (vec!["no-cusp", "--scene", &two3, "--at", "0,0,0"], 2),
        (vec!["link", "--scene", &two3, "--at", "0,0,0", "--eps", "0.2", "--res", "24"], 0),
        (vec!["dim-check", "--scene", &two, "--res", "32"], 0),
        (vec!["dim-check", "--scene", &taxi, "--window", "-1,2,-1,2", "--res", "32"], 1),
        (vec!["embedding", "--scene", &two, "--at", "0,0", "--scales", "0.4,0.2"], 0),
        (vec!["demo", "unknown-demo"], 2),
    ];
    for (args, code) in cases {
        let out = conflict(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn non_conflict_point_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let two = write_scene(dir.path(), "two.json", TWO_POINTS_2D);
    let out = conflict(&["verify-tangent", "--scene", &two, "--at", "0.5,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a conflict point"));
}

#[test]
fn reports_and_geometry_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let two3 = write_scene(dir.path(), "two3.json", TWO_POINTS_3D);
    let run = |workers: &str| {
        let base = dir.path().join(format!("w{workers}"));
        let b = base.to_str().unwrap();
        let out = conflict(&["extract", "--scene", &two3, "--window", "-1,1,-1,1,-1,1", "--res", "20", "--out", b, "--workers", workers]);
        assert_eq!(out.status.code(), Some(0));
        let scan = conflict(&["embedding", "--scene", &two3, "--at", "0,0,0", "--scales", "0.6,0.3", "--res", "24", "--seed", "3", "--workers", workers]);
        assert_eq!(scan.status.code(), Some(0));
        (fs::read(format!("{b}.obj")).unwrap(), fs::read(format!("{b}.json")).unwrap(), scan.stdout)
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn report_flag_writes_the_tangent_report() {
    let dir = tempfile::tempdir().unwrap();
    let two = write_scene(dir.path(), "two.json", TWO_POINTS_2D);
    let report = dir.path().join("nested/out.json");
    let out = conflict(&["verify-tangent", "--scene", &two, "--at", "0,0", "--eps", "0.4,0.2", "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "PASS");
    for key in ["eps", "d_to_spherical", "d_successive"] {
        assert!(v[key].is_array(), "{key}");
    }
}
