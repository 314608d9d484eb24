mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::examples_dir;
use serde_json::Value;

fn cogeo(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogeo"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("COGEO_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn example(name: &str) -> String {
    examples_dir().join(format!("{name}.scn")).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).expect("manifest written")).unwrap()
}

#[test]
fn validate_ok() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogeo(dir.path(), &["validate", &example("leadership")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "validate");
    assert_eq!(m["scenario_hash"].as_str().unwrap().len(), 64);
    assert!(m["engine_version"].is_string());
}

#[test]
fn leadership_reports_blind_members() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogeo(
        dir.path(),
        &["leadership", &example("leadership"), "--leader", "L", "--being", "x_prime"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("A1: in component"), "{out}");
    assert!(out.contains("A3: not in component"), "{out}");
    assert!(dir.path().join("leadership.json").exists());
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogeo(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("usage"));
}

#[test]
fn invalid_scenario_exits_one_with_locations() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(
        &bad,
        "version = \"1\"\n[[agents]]\nid = \"A\"\ndim = 1\n[[agents]]\nid = \"B\"\ndim = 1\n\
         [[maps]]\nsource = \"A\"\ntarget = \"B\"\nidentity = true\n\
         [graph]\nnodes = [\"A\", \"B\"]\nedges = [{ from = \"A\", to = \"B\", p = 0.0 }]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = cogeo(&out, &["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.scn:14:"), "{err}");
    assert_eq!(manifest(&out)["status"], "invalid");
}

#[test]
fn runtime_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogeo(dir.path(), &["report", &example("alignment"), "--analysis", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(manifest(dir.path())["status"], "error");
    let o = cogeo(dir.path(), &["validate", "/nonexistent/file.scn"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_traces_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogeo(dir.path(), &["simulate", &example("network"), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["traces.csv", "traces.json", "report.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m = manifest(dir.path());
    assert_eq!(m["seed"], 7);
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(files, ["traces.csv", "traces.json", "report.json"]);
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario_hash"], m["scenario_hash"]);
}

#[test]
fn coherence_and_counterfactual() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("pair.scn");
    std::fs::write(
        &scn,
        "version = \"1\"\n[[agents]]\nid = \"A\"\ndim = 2\n[[agents]]\nid = \"B\"\ndim = 2\n\
         [[beings]]\nid = \"x\"\nrepresentations = { A = [1.0, 2.0] }\n\
         [[maps]]\nsource = \"A\"\ntarget = \"B\"\nmatrix = [[1.05, 0.0], [0.0, 1.0]]\n\
         [[maps]]\nsource = \"B\"\ntarget = \"A\"\nmatrix = [[1.0, 0.0], [0.0, 0.98]]\n",
    )
    .unwrap();
    let o = cogeo(dir.path(), &["coherence", scn.to_str().unwrap(), "--pair", "A,B", "--eps", "0.1", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "APPLICABLE");
    assert_eq!(v["holds"], true);
    assert_eq!(v["per_step"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("coherence.json").exists());
    let o = cogeo(dir.path(), &["coherence", scn.to_str().unwrap(), "--pair", "A,B", "--eps", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "NOT_APPLICABLE");
    let o = cogeo(dir.path(), &["counterfactual", &example("counterfactual"), "--agents", "I,J"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reversal"]["verdict"], "WITNESS");
    let o = cogeo(dir.path(), &["counterfactual", &example("counterfactual"), "--agents", "I"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_runs_named_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogeo(dir.path(), &["report", &example("motivational_alignment"), "--analysis", "goal_update"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["analyses"].as_array().unwrap().len(), 1);
    assert_eq!(v["analyses"][0]["kind"], "goal_update");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cogeo"))
        .args(["validate", &example("alignment")])
        .env("COGEO_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("manifest.json").exists());
}
