use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pseudopath"));
    cmd.env_remove("PSEUDOPATH_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn check_passes_and_is_deterministic() {
    let a = run(&["check", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let report = json(&a);
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(report["seed"], 7);
    assert!(report["items"].as_array().unwrap().len() >= 8);
    let b = run(&["check", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let one = bin().args(["check", "--seed", "3"]).env("PSEUDOPATH_THREADS", "1").output().unwrap();
    let four = bin().args(["check", "--seed", "3"]).env("PSEUDOPATH_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let bad = bin().arg("check").env("PSEUDOPATH_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn quartic_growth_has_no_bounded_measure() {
    let out = run(&["tvgrowth", "--p", "4", "--alpha", "-1,0", "--t", "1", "--n", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "NoBoundedComplexMeasure");
    let per = v["per_slice_tv"].as_f64().unwrap();
    assert!(per > 1.2 && per < 1.3);
    assert!((v["total"].as_f64().unwrap() - per.powi(10)).abs() < 1e-8);
}

#[test]
fn heat_growth_stays_bounded() {
    let out = run(&["tvgrowth", "--p", "2", "--alpha", "-0.5,0", "--t", "1", "--n", "50", "--grid", "-12,12,2048"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "ProjectiveLimitPossible");
}

#[test]
fn kernel_csv_and_json() {
    let out = run(&["kernel", "--p", "2", "--alpha", "-0.5,0", "--t", "1", "--grid", "-20,20,400"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,re,im"));
    assert_eq!(lines.count(), 400);

    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("kernel.json");
    let out = run(&[
        "kernel", "--p", "2", "--alpha", "-0.5,0", "--t", "1", "--grid", "-20,20,400", "--format", "json", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["values"].as_array().unwrap().len(), 400);
    assert_eq!(v["grid"]["n_points"], 400);
    assert!((v["mass"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["tail_mass_bound"].as_f64().unwrap() < 1e-6);
}

#[test]
fn airy_kernel_has_no_tail_bound() {
    let out = run(&["kernel", "--p", "3", "--alpha", "0,0.3333333333333333", "--t", "1", "--grid", "-8,4,256", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["tail_mass_bound"].is_null());
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(run(&["kernel", "--p", "2"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--p", "1", "--alpha", "-1,0", "--t", "1", "--grid", "-2,2,8"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--p", "2", "--alpha", "-1", "--t", "1", "--grid", "-2,2,8"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--p", "2", "--alpha", "1,0", "--t", "1", "--grid", "-2,2,8"]).status.code(), Some(2));
    let bad = tmp("malformed.json", "{\"d\": 1, ");
    let out = run(&["parseval", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["parseval", "--input", "/nonexistent/input.json"]).status.code(), Some(2));
    assert_eq!(run(&["tvgrowth", "--p", "4", "--alpha", "-1,0", "--t", "1", "--n", "2", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one() {
    // The kernel does not fit on this grid.
    let out = run(&["kernel", "--p", "2", "--alpha", "-0.5,0", "--t", "1", "--grid", "-2,2,4"]);
    assert_eq!(out.status.code(), Some(1));
    // Airy marginals have no total variation.
    let out = run(&["tvgrowth", "--p", "3", "--alpha", "0,1", "--t", "1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parseval_methods_agree() {
    let input = tmp(
        "parseval.json",
        r#"{"d": 2, "eigenvalues": [0.3, -0.4],
            "eigenvectors": [[0.6, 0.8], [-0.8, 0.6]],
            "atoms": [{"y": [0.5, 1.0], "w": [1.0, 0.0]}, {"y": [-0.2, 0.3], "w": [0.0, 0.5]}],
            "hbar": 0.7}"#,
    );
    for method in ["regularized", "growing-box"] {
        let out = run(&["parseval", "--input", input.to_str().unwrap(), "--method", method]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert!(v["rel_err"].as_f64().unwrap() < 1e-8, "{method}: {v}");
    }
    let singular = tmp("singular.json", r#"{"d": 1, "eigenvalues": [1.0], "atoms": [], "hbar": 1.0}"#);
    assert_eq!(run(&["parseval", "--input", singular.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn cylinder_refinement_is_compatible() {
    let input = tmp(
        "cylinder.json",
        r#"{"horizon": 1.0, "times": [0.25, 0.5], "atoms": [{"y": [1.0, -0.5], "w": [0.5, 0.5]}]}"#,
    );
    let out = run(&[
        "cylinder", "--input", input.to_str().unwrap(), "--p", "4", "--alpha", "-1,0", "--method", "quadrature",
        "--refine", "0.75",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["compatibility_gap"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["within_bound"], true);
    assert_eq!(v["refined_times"].as_array().unwrap().len(), 3);
}

#[test]
fn fk_writes_solution_and_report() {
    let u0 = tmp(
        "u0.json",
        r#"{"atoms": [{"y": [0.0], "w": [1.0, 0.0]}, {"y": [0.25], "w": [0.25, 0.0]}, {"y": [-0.25], "w": [0.25, 0.0]}]}"#,
    );
    let v = tmp("v.json", r#"{"atoms": [{"y": [0.5], "w": [0.1, 0.0]}, {"y": [-0.5], "w": [0.1, 0.0]}]}"#);
    let report = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("fk_report.json");
    let half = 4.0 * std::f64::consts::PI;
    let grid = format!("{},{},64", -half, half);
    let out = run(&[
        "fk", "--p", "4", "--alpha", "-1,0", "--t", "0.25", "--nslices", "16", "--grid", &grid, "--u0",
        u0.to_str().unwrap(), "--potential", v.to_str().unwrap(), "--ladder", "4,8,16", "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x,re,im\n"));
    assert_eq!(text.lines().count(), 65);
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for order in r["orders"].as_array().unwrap() {
        assert!((order.as_f64().unwrap() - 1.0).abs() < 0.1);
    }

    // Without --report the convergence report goes to stderr.
    let out = run(&[
        "fk", "--p", "4", "--alpha", "-1,0", "--t", "0.25", "--nslices", "4", "--grid", &grid, "--u0",
        u0.to_str().unwrap(), "--potential", v.to_str().unwrap(), "--ladder", "4,8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(r["entries"].as_array().unwrap().len(), 2);
}
