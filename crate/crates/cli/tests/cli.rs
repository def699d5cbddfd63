use std::path::Path;
use std::process::{Command, Output};

fn rgue(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgue"))
        .args(args)
        .current_dir(dir)
        .env_remove("MK_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn grid_config(points: usize) -> String {
    format!(
        r#"{{"command": "eval-kernel", "params": {{
            "kernel": {{"kind": "gue_level", "n": 4}}, "n1": 4, "n2": 4,
            "x1": {{"lo": -2, "hi": 2, "points": {points}}},
            "x2": {{"lo": -2, "hi": 2, "points": {points}}}}}}}"#
    )
}

#[test]
fn eval_kernel_grid_has_one_row_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", &grid_config(41));
    let out = rgue(dir.path(), &["eval-kernel", "--config", &cfg, "--out", "k.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n1,x1,n2,x2,re,im,abs_err_estimate");
    assert_eq!(lines.len(), 1 + 41 * 41);
    assert!(lines[1].starts_with("4,-2e0,4,-2e0,"));

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["summary"]["rows"], 1681);
    assert_eq!(sidecar["config"]["command"], "eval-kernel");
}

#[test]
fn unknown_subcommand_fails_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = rgue(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = rgue(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("eval-kernel"));
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"seed": 17, "params": {"model": {"kind": "rising", "cfg": {"explicit": [1.0, -1.0]}, "t": 2}, "replicas": 20}}"#,
    );
    for name in ["a.csv", "b.csv"] {
        let out = rgue(dir.path(), &["sample", "--config", &cfg, "--out", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);

    let out = rgue(dir.path(), &["sample", "--config", &cfg, "--seed", "18", "--out", "c.csv"]);
    assert!(out.status.success());
    assert_ne!(a, std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", &grid_config(9));
    for (threads, name) in [("1", "one.csv"), ("3", "three.csv")] {
        let out = rgue(dir.path(), &["eval-kernel", "--config", &cfg, "--threads", threads, "--out", name]);
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(dir.path().join("one.csv")).unwrap(),
        std::fs::read(dir.path().join("three.csv")).unwrap()
    );
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"params": {"kernel": {"kind": "fixed_start", "cfg": {"explicit": [1.0, -1.0]}},
            "n1": 3, "n2": 3, "x1": {"lo": 1, "hi": 0, "points": 4}, "x2": {"lo": 0, "hi": 1, "points": 2}}}"#,
    );
    let out = rgue(dir.path(), &["eval-kernel", "--config", &cfg, "--out", "k.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.x1"));
    assert!(!dir.path().join("k.csv").exists());

    let cfg = write(dir.path(), "noseed.json", r#"{"params": {"model": {"kind": "gue_minors", "n": 3}, "replicas": 2}}"#);
    let out = rgue(dir.path(), &["sample", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let cfg = write(dir.path(), "typo.json", r#"{"sed": 3}"#);
    let out = rgue(dir.path(), &["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sed"));
}

#[test]
fn command_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", &grid_config(3));
    let out = rgue(dir.path(), &["saddle", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("command"));
}

#[test]
fn sample_feeds_a_kernel_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"seed": 4, "params": {"model": {"kind": "gue_minors", "n": 3}, "replicas": 2}}"#,
    );
    assert!(rgue(dir.path(), &["sample", "--config", &cfg, "--out", "s.csv"]).status.success());
    let cfg = write(
        dir.path(),
        "k.json",
        r#"{"params": {"kernel": {"kind": "fixed_start",
              "cfg": {"from_sample": {"path": "s.csv", "replica": 1, "level": 3}}},
            "n1": 4, "n2": 4, "x1": {"lo": 0.1, "hi": 0.1, "points": 1}, "x2": {"lo": 0.1, "hi": 0.1, "points": 1}}}"#,
    );
    let out = rgue(dir.path(), &["eval-kernel", "--config", &cfg, "--out", "k.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    let density: f64 = text.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!(density > 0.0 && density.is_finite());
}

#[test]
fn verify_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rgue(dir.path(), &["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rgue-verify.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn saddle_rows_approach_the_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sd.json", r#"{"params": {"ms": [400], "energies": [0.0, 0.5]}}"#);
    let out = rgue(dir.path(), &["saddle", "--config", &cfg, "--out", "sd.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sd.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r[7] < 0.05, "distance {}", r[7]);
        assert!(r[8] < 1e-10, "residual {}", r[8]);
    }
}
