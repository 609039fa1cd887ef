//! End-to-end tests of the `asymptotica` binary: exit codes, report files,
//! determinism, and config error reporting.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asymptotica"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn zoo_list_names_the_builtin_operators() {
    let out = run(&["zoo", "list"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for needle in ["forward_shift", "backward_shift", "volterra", "mult_exp"] {
        assert!(text.contains(needle), "missing {needle} in:\n{text}");
    }
}

#[test]
fn run_orbit_config_writes_report_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let config = tmp.path().join("orbit.json");
    let body = serde_json::json!({
        "schema": 1,
        "experiment": "orbit",
        "operator": { "op": "example2", "dim": 8 },
        "horizon": 16,
        "vectors": [ { "seed": 3 }, { "basis": 1 } ],
    });

    for out_dir in [&out_a, &out_b] {
        let mut cfg = body.clone();
        cfg["output"] = serde_json::json!(out_dir);
        fs::write(&config, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
        let out = run(&["run", config.to_str().unwrap()]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        assert!(out_dir.join("report.csv").is_file());
        assert!(out_dir.join("summary.txt").is_file());
    }

    // Same config and seeds must reproduce the CSV byte for byte.
    assert_eq!(
        read(&out_a.join("report.csv")),
        read(&out_b.join("report.csv")),
        "repeated runs diverged"
    );

    let csv = read(&out_a.join("report.csv"));
    let mut lines = csv.lines();
    let header = lines.next().expect("header row");
    assert!(header.starts_with("vector,"), "header: {header}");
    assert!(lines.count() > 16, "expected per-step rows");
}

#[test]
fn unknown_config_key_is_rejected_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.json");
    fs::write(
        &config,
        r#"{ "schema": 1, "experiment": "orbit",
             "operator": { "op": "identity", "dim": 4, "rank": 2 } }"#,
    )
    .unwrap();
    let out = run(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("operator"), "error lacks offending path: {err}");
}

#[test]
fn malformed_json_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("broken.json");
    fs::write(&config, "{ not json").unwrap();
    let out = run(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn verify_idempotent_case_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("example2");
    let out = run(&[
        "verify",
        "example2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let summary = read(&out_dir.join("summary.txt"));
    assert!(summary.contains("result: PASS"), "summary:\n{summary}");
}

#[test]
fn verify_unmet_expectation_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("example4");
    // Small grid keeps this fast; the tail-decay expectations are not met
    // at any grid size, so the documented exit code is 2.
    let out = run(&[
        "verify",
        "example4",
        "--dim",
        "64",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let summary = read(&out_dir.join("summary.txt"));
    assert!(summary.contains("result: FAIL"), "summary:\n{summary}");
    assert!(summary.contains("EXPECTATION FAILED"), "summary:\n{summary}");
}

#[test]
fn thread_override_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("threads");
    let out = bin()
        .env("ASYMPTOTICA_THREADS", "1")
        .args(["verify", "theorem3", "--out", out_dir.to_str().unwrap()])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}
