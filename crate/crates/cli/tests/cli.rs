use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polyvem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyvem")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Values of a named point scalar from a legacy VTK file.
fn vtk_scalar(text: &str, name: &str) -> Vec<f64> {
    let n: usize = text.lines().find(|l| l.starts_with("POINTS")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let i = lines.iter().position(|l| *l == format!("SCALARS {name} double 1")).unwrap();
    lines[i + 2..i + 2 + n].iter().map(|x| x.parse().unwrap()).collect()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(polyvem(&[]).status.code(), Some(1));
    assert_eq!(polyvem(&["solve-thermal"]).status.code(), Some(1));
    assert_eq!(polyvem(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(polyvem(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_with_two_and_name_the_problem() {
    let out = polyvem(&["solve-thermal", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.json"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(config("strip_thermal.json")).unwrap().replacen('{', r#"{"tau": 2.0,"#, 1);
    std::fs::write(&bad, text).unwrap();
    let out = polyvem(&["solve-thermal", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));
}

#[test]
fn solve_thermal_writes_bounded_field_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyvem(&["solve-thermal", "--config", &config("strip_thermal.json"), "-o", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = vtk_scalar(&std::fs::read_to_string(dir.path().join("result.vtk")).unwrap(), "temperature");
    assert!(t.iter().all(|&x| (25.0 - 1e-9..=80.0 + 1e-9).contains(&x)));
    assert!(t.contains(&80.0) && t.contains(&25.0));
    let summary = json(&dir.path().join("summary.json"));
    let left = summary["heat_reactions"]["left"].as_f64().unwrap();
    let right = summary["heat_reactions"]["right"].as_f64().unwrap();
    assert!(left > 0.0 && (left + right).abs() <= 1e-9 * left);
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "solve-thermal");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn solve_coupled_balances_applied_traction() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyvem(&["solve-coupled", "--config", &config("strip_coupled.json"), "-o", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("summary.json"));
    let r = &summary["force_reactions"]["left"];
    assert!(r[0].as_f64().unwrap().abs() < 1e-8);
    assert!((r[1].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!(summary["von_mises_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn cylinder_benchmark_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path: PathBuf = dir.path().join("cyl.json");
    let out = polyvem(&["benchmark", "cylinder", "--nodes", "500", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&path);
    assert!(report["eav_r"].as_f64().unwrap() > 0.0);
    assert!(report["eav_theta"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("cyl.manifest.json").exists());
}

#[test]
fn mesh_gen_and_merge_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let merged = dir.path().join("m.json");
    let spec_a = r#"{"kind": "quad", "x": [0, 1], "y": [0, 1], "nx": 3, "ny": 3, "region": "a"}"#;
    let spec_b = r#"{"kind": "voronoi", "x": [1, 2], "y": [0, 1], "seeds": 12, "seed": 4, "region": "b"}"#;
    assert!(polyvem(&["mesh-gen", spec_a, "-o", a.to_str().unwrap()]).status.success());
    assert!(polyvem(&["mesh-gen", spec_b, "-o", b.to_str().unwrap()]).status.success());
    let out = polyvem(&["merge", a.to_str().unwrap(), b.to_str().unwrap(), "--tag-a", "right", "--tag-b", "left", "-o", merged.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json(&merged);
    let na = json(&a)["elements"].as_array().unwrap().len();
    let nb = json(&b)["elements"].as_array().unwrap().len();
    assert_eq!(m["elements"].as_array().unwrap().len(), na + nb);
}
