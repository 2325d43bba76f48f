use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mimicry"));
    c.env_remove("MIMICRY_CACHE_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn mimicry")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn validate(kind: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_dir().join(format!("{kind}.schema.json"))).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).expect("valid schema");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{kind}: {errors:?}");
}

#[test]
fn sum_examples() {
    let doc = json_of(&run(&["sum", "--char", "q=4,index=1", "--x", "1000", "--alpha", "0.25"]));
    validate("sum", &doc);
    let pts = doc["result"]["points"].as_array().unwrap();
    let abs: Vec<f64> = pts
        .iter()
        .map(|p| {
            let v = p["value"].as_array().unwrap();
            v[0].as_f64().unwrap().hypot(v[1].as_f64().unwrap())
        })
        .collect();
    // |S| grows like the odd harmonic sum
    assert!(abs[abs.len() / 10] < abs[abs.len() - 1]);
    assert!((doc["result"]["max_abs"].as_f64().unwrap() - 4.0890591455550826).abs() < 1e-12);

    let doc = json_of(&run(&["sum", "--one", "--x", "100", "--alpha", "0"]));
    let last = doc["result"]["points"].as_array().unwrap().last().unwrap()["value"][0].as_f64().unwrap();
    assert!((last - 5.1873775176396203).abs() < 1e-13);

    let doc = json_of(&run(&["sum", "--max-char-sum", "--char", "legendre:5"]));
    validate("sum", &doc);
    assert_eq!(doc["result"]["max_abs"].as_f64().unwrap(), 1.0);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["sum", "--char", "q=4,index", "--x", "10"]).status.code(), Some(2));
    assert_eq!(run(&["sum", "--char", "q=4,index=7", "--x", "10"]).status.code(), Some(2));
    assert_eq!(run(&["sum", "--x", "10"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "nosuchsuite"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sum", "--one", "--x", "1e12"]).status.code(), Some(3));
    assert_eq!(run(&["--sieve-cap", "1000", "extremal", "--g", "3", "--qmax", "5000"]).status.code(), Some(3));
    let out = run(&["--tolerance", "1e-300", "verify", "gauss", "--q-max", "60"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["passed"], Value::Bool(false));
}

#[test]
fn verify_suites() {
    let doc = json_of(&run(&["verify", "summin"]));
    validate("verify", &doc);
    // full (g, k, θ) grid plus the exact hand case
    assert_eq!(doc["result"]["total"].as_u64().unwrap(), 5 * 12 * 101 + 1);
    let doc = json_of(&run(&["verify", "gauss"]));
    validate("verify", &doc);
    assert_eq!(doc["result"]["passed"], Value::Bool(true));
    for s in ["gs-identity", "coset", "triangle", "vanishing"] {
        let doc = json_of(&run(&["verify", s, "--cases", "20", "--q-max", "40"]));
        validate("verify", &doc);
    }
}

#[test]
fn arcs_and_nearest() {
    let doc = json_of(&run(&["arcs", "--alpha", "0.25", "--y", "1e6", "--m", "4"]));
    validate("arcs", &doc);
    assert_eq!(doc["result"]["arc_tag"], "MajorExceptional");
    let doc = json_of(&run(&["arcs", "--alpha", "0", "--y", "100", "--m", "4"]));
    assert_eq!(doc["result"]["arc_tag"], "MajorNonExceptional");
    assert_eq!(run(&["arcs", "--alpha", "0.3", "--y", "10", "--m", "4"]).status.code(), Some(2));

    let doc = json_of(&run(&["nearest", "--char", "q=8,index=2", "--y", "1e4", "--bound", "10"]));
    validate("nearest", &doc);
    assert_eq!(doc["result"]["best"]["conductor"].as_u64(), Some(4));
    let doc = json_of(&run(&["nearest", "--char", "chi-4", "--twist", "-2.5", "--y", "1e3", "--bound", "6"]));
    assert!((doc["result"]["best"]["report"]["minimizing_t"].as_f64().unwrap() + 2.5).abs() < 1e-6);
}

#[test]
fn extremal_resume() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().to_str().unwrap();
    let base = ["extremal", "--g", "3", "--xi", "chi-4", "--qmax", "1e5", "--p-star", "5", "--runs-dir", runs];
    let full = json_of(&run(&[&base[..], &["--resume", "whole"]].concat()));
    validate("extremal", &full);
    assert_eq!(full["result"]["state"]["complete"], Value::Bool(true));

    let part = json_of(&run(&[&base[..], &["--resume", "run1", "--max-batches", "1", "--checkpoint-secs", "0"]].concat()));
    validate("extremal", &part);
    assert_eq!(part["result"]["state"]["complete"], Value::Bool(false));
    let done = json_of(&run(&[&base[..], &["--resume", "run1"]].concat()));
    assert_eq!(done["result"]["state"]["records"], full["result"]["state"]["records"]);
    assert_eq!(done["result"]["state"]["witness"], full["result"]["state"]["witness"]);
    let a = std::fs::read(tmp.path().join("whole/records.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("run1/records.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["--format", "csv", "sum", "--random-unimodular", "5000", "--x", "5000", "--y", "100", "--alpha", "0.3"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[&["--seed", "7"][..], &args[..]].concat());
    assert_ne!(a.stdout, c.stdout);

    let v = ["--format", "csv", "verify", "triangle", "--cases", "30"];
    assert_eq!(run(&v).stdout, run(&v).stdout);
}

#[test]
fn cache_dir_from_env() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .env("MIMICRY_CACHE_DIR", tmp.path())
        .args(["nearest", "--one", "--y", "5000", "--bound", "4"])
        .output()
        .unwrap();
    let doc = json_of(&out);
    assert_eq!(doc["config"]["cache_dir"].as_str(), tmp.path().to_str());
    assert!(tmp.path().join("primes-v1.bin").exists());
}
