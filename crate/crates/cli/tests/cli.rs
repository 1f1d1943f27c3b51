use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn qcmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcmod"))
        .args(args)
        .env_remove("QCMOD_THREADS")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = qcmod(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qcmod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn ring_modulus_near_closed_form() {
    let v = report(&["modulus-ring", "--n", "2", "--r1", "1", "--r2", "2.71828", "--curves", "720", "--grid", "256"]);
    let analytic = v["report"]["analytic"].as_f64().unwrap();
    let discrete = v["report"]["discrete"]["value"].as_f64().unwrap();
    assert!((analytic - std::f64::consts::TAU).abs() < 1e-3);
    assert!((discrete / analytic - 1.0).abs() < 0.05);
    assert_eq!(v["config"]["grid"], 256);
    assert_eq!(v["config"]["seed"], 0);
}

#[test]
fn integrability_example() {
    let v = report(&["integrability", "--alpha", "1", "--p", "1", "--n", "2"]);
    assert_eq!(v["report"]["finite"], true);
    assert_eq!(v["report"]["threshold"], 2.0);
    let v = report(&["integrability", "--alpha", "2", "--p", "2", "--n", "2"]);
    assert_eq!(v["report"]["finite"], false);
    assert_eq!(v["report"]["value"], Value::Null);
}

#[test]
fn cluster_limit_at_e2() {
    let v = report(&["cluster", "--map", "radial-inverse", "--alpha", "1", "--target", "e2", "--radii", "1e-2:1e-6"]);
    assert_eq!(v["report"]["extends"], true);
    let lim = v["report"]["limit"].as_array().unwrap();
    assert!(lim[0].as_f64().unwrap().abs() < 1e-3);
    assert!((lim[1].as_f64().unwrap() - 0.5).abs() < 1e-3);
    assert_eq!(v["config"]["radii_list"].as_array().unwrap().len(), 5);
}

#[test]
fn unsatisfied_verdict_is_not_an_error() {
    let v = report(&[
        "verify-ring", "--map", "identity", "--r1", "1", "--r2", "2", "--q", "constant",
        "--q-value", "0", "--curves", "32", "--grid", "32",
    ]);
    assert_eq!(v["report"]["satisfied"], false);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["weakflat", "--eps", "0.1", "--curves", "40", "--grid", "48", "--seed", "7"];
    let a = qcmod(&args);
    let b = qcmod(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    let c = qcmod(&["weakflat", "--eps", "0.1", "--curves", "40", "--grid", "48", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_sweep_has_one_line_per_alpha() {
    let out = qcmod(&["integrability", "--alpha", "0.5,0.9,1.1", "--p", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("command,config.alpha"));
    assert!(lines[3].contains(",false,"));
}

#[test]
fn output_file_matches_stdout() {
    let path = scratch("recenter.json");
    let p = path.to_str().unwrap();
    let args = ["recenter", "--eps1", "1", "--eps1-star", "2"];
    let direct = qcmod(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", p]);
    assert!(qcmod(&with_file).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    let v: Value = serde_json::from_slice(&direct.stdout).unwrap();
    assert_eq!(v["report"]["recenter"]["k0"], 3);
}

#[test]
fn general_inequality_from_files() {
    let fam = json!({
        "label": "bars",
        "n": 2,
        "curves": [
            [[0.0, 0.1], [1.0, 0.1]],
            [[0.0, 0.5], [0.5, 0.55], [1.0, 0.5]],
            [[0.0, 0.9], [1.0, 0.9]],
        ],
    });
    let path = scratch("family.json");
    std::fs::write(&path, fam.to_string()).unwrap();
    let v = report(&["verify-general", "--family", path.to_str().unwrap(), "--source-grid", "16", "--grid", "16"]);
    let r = &v["report"]["verification"];
    assert_eq!(r["satisfied"], true);
    assert_eq!(r["metadata"]["family_size"], 3);
    // identity map and Q = 1: both sides are the same discrete problem
    let lhs = r["lhs"]["value"].as_f64().unwrap();
    let rhs = r["rhs"].as_f64().unwrap();
    assert!((lhs - rhs).abs() <= 1e-3 * rhs, "{lhs} vs {rhs}");
}

#[test]
fn exit_codes() {
    assert_eq!(qcmod(&["modulus-ring", "--r1", "2", "--r2", "1"]).status.code(), Some(2));
    assert_eq!(qcmod(&["cluster", "--map", "nope", "--target", "e2"]).status.code(), Some(2));
    assert_eq!(qcmod(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qcmod(&["weakflat", "--p", "3"]).status.code(), Some(2));
    let missing = qcmod(&["verify-general", "--family", "/nonexistent/family.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    let slow = qcmod(&["modulus-ring", "--r1", "1", "--r2", "2", "--grid", "32", "--curves", "64", "--max-iter", "1"]);
    assert_eq!(slow.status.code(), Some(3));
    assert!(!slow.stdout.is_empty());
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_qcmod"))
        .args(["integrability", "--alpha", "1"])
        .env("QCMOD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_qcmod"))
        .args(["integrability", "--alpha", "1"])
        .env("QCMOD_THREADS", "1")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
