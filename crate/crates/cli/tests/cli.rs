use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn qfine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfine")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `T = diag(1 + 2e1, -0.5 + e2)` and `q`.
fn fixtures(dir: &Path) -> (PathBuf, PathBuf) {
    let t = json!({
        "n": 2,
        "T0": [[1.0, 0.0], [0.0, -0.5]],
        "T1": [[2.0, 0.0], [0.0, 0.0]],
        "T2": [[0.0, 0.0], [0.0, 1.0]],
        "T3": [[0.0, 0.0], [0.0, 0.0]],
    });
    let f = json!({"kind": "poly", "coeffs": [[0, 0, 0, 0], [1, 0, 0, 0]]});
    (write(dir, "t.json", &t), write(dir, "q.json", &f))
}

fn result_entries(o: &Output) -> Vec<f64> {
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    ["T0", "T1", "T2", "T3"]
        .iter()
        .flat_map(|k| doc["result"][k].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap())))
        .collect()
}

#[test]
fn spectrum_of_a_scalar() {
    let dir = TempDir::new().unwrap();
    let t = json!({"n": 1, "T0": [[1.0]], "T1": [[2.0]], "T2": [[0.0]], "T3": [[0.0]]});
    let o = qfine(&["spectrum", write(dir.path(), "t.json", &t).to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "(1, 2)\n");
}

#[test]
fn spectrum_lists_every_sphere() {
    let dir = TempDir::new().unwrap();
    let (t, _) = fixtures(dir.path());
    let o = qfine(&["spectrum", t.to_str().unwrap()]);
    assert_eq!(stdout(&o), "(-0.5, 1)\n(1, 2)\n");
    let o = qfine(&["spectrum", t.to_str().unwrap(), "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn s_calculus_of_q_is_the_tuple() {
    let dir = TempDir::new().unwrap();
    let (t, q) = fixtures(dir.path());
    let o = qfine(&["calculus", t.to_str().unwrap(), q.to_str().unwrap(), "--kind", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let want = [1.0, 0.0, 0.0, -0.5, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    for (g, w) in result_entries(&o).iter().zip(want) {
        assert!((g - w).abs() <= 1e-12, "{g} {w}");
    }
}

#[test]
fn q_calculus_of_q_is_minus_two() {
    let dir = TempDir::new().unwrap();
    let (t, q) = fixtures(dir.path());
    let o = qfine(&["calculus", t.to_str().unwrap(), q.to_str().unwrap(), "--kind", "Q"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["kind"], "Q");
    assert_eq!(doc["J"].as_array().unwrap().len(), 4);
    let want = [-2.0, 0.0, 0.0, -2.0];
    let got = result_entries(&o);
    for (g, w) in got.iter().zip(want.iter().chain([0.0; 12].iter())) {
        assert!((g - w).abs() <= 1e-12, "{g} {w}");
    }
}

#[test]
fn unbounded_p2_names_the_missing_condition() {
    let dir = TempDir::new().unwrap();
    let (t, q) = fixtures(dir.path());
    let o = qfine(&["calculus", t.to_str().unwrap(), q.to_str().unwrap(), "--kind", "p2", "--mode", "unbounded-transform", "--alpha", "-3"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("f(α)=0"), "{}", stderr(&o));
}

#[test]
fn unreachable_tolerance_is_a_numeric_failure() {
    let o = qfine(&["verify", "--dim", "1", "--trials", "1", "--rtol", "1e-20"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn out_of_range_arguments_are_rejected() {
    assert_eq!(qfine(&["verify", "--dim", "0"]).status.code(), Some(1));
    assert_eq!(qfine(&["verify", "--rtol", "0.5"]).status.code(), Some(1));
}

#[test]
fn verify_fails_exactly_the_transform_defects() {
    let o = qfine(&["verify", "--dim", "1", "--trials", "1", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut failing = Vec::new();
    for e in report["entries"].as_array().unwrap() {
        let r = e["max_residual"].as_f64().unwrap();
        if e["pass"].as_bool().unwrap() {
            assert!(r <= 1e-12, "{e}");
        } else {
            failing.push(e["identity"].as_str().unwrap().to_string());
        }
    }
    assert_eq!(failing, ["TRANSFORM_VS_INTEGRAL_Q", "TRANSFORM_VS_INTEGRAL_F", "TRANSFORM_VS_INTEGRAL_P2"]);
    assert!(stderr(&o).contains("FAIL TRANSFORM_VS_INTEGRAL_Q trial 0"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_qfine"))
            .args(["verify", "--dim", "2", "--trials", "3", "--seed", "11", "--out", out.to_str().unwrap()])
            .env("QFINE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(2));
        std::fs::read(out).unwrap()
    };
    let a = run("1", "a.json");
    assert_eq!(a, run("4", "b.json"));
    assert_eq!(a, run("1", "c.json"));
}

#[test]
fn markdown_report_tabulates_the_conditions() {
    let o = qfine(&["verify", "--dim", "1", "--trials", "1", "--format", "md"]);
    let md = stdout(&o);
    assert!(md.contains("| F | f(α)=0 |"), "{md}");
    assert!(md.contains("| P2 | f(α)=0 and ∂_α f(α)=0 |"));
}

#[test]
fn fueter_diagrams_of_a_cubic_vanish() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "q3.json", &json!({"kind": "poly", "coeffs": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0]]}));
    let o = qfine(&["fueter", f.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["laplacian_of_d", "d_squared_of_dbar", "d_of_laplacian"] {
        assert!(v[k].as_f64().unwrap() <= 1e-4, "{k}: {}", v[k]);
    }
}

#[test]
fn malformed_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let (t, _) = fixtures(dir.path());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"poly\", \"coeffs\": [[1, 2]]}").unwrap();
    let o = qfine(&["calculus", t.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = qfine(&["spectrum", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
