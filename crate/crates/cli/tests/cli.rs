use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"{"problem":"elliptic2d","model":"model1","n":2,"m":2,"mu":2,"variant":"psibar_global"}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-schwarz"))
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

#[test]
fn solve_writes_a_row_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.json", SMALL);
    let out = dir.path().join("rows.csv");
    let o = run(&["solve", "--out", out.to_str().unwrap()], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# schema=1"));
    assert_eq!(text.lines().count(), 3);

    // a second run appends without repeating the header
    let o = run(&["solve", "--out", out.to_str().unwrap()], &cfg);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
}

#[test]
fn solve_to_stdout() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.json", SMALL);
    let o = run(&["solve"], &cfg);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().nth(1).unwrap().contains("iterations"));
}

#[test]
fn unconverged_solve_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "capped.json",
        r#"{"problem":"elliptic2d","model":"model2","n":4,"m":4,"mu":4,"variant":"one_level","max_it":2}"#,
    );
    let o = run(&["solve"], &cfg);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not converged"));
}

#[test]
fn bad_config_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", r#"{"problem":"elliptic2d","model":"model1","n":0,"m":2,"variant":"one_level"}"#);
    let o = run(&["solve"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["solve"], &missing).status.code(), Some(1));
}

#[test]
fn sweep_runs_every_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.json", SMALL);
    let out = dir.path().join("sweep.csv");
    let o = bin()
        .args(["sweep", "--vary", "mu=1,2,3", "--vary", "n=2,3", "--jobs", "2", "--out"])
        .arg(&out)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2 + 6);

    let o = bin().args(["sweep", "--vary", "mu"]).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spectrum_reports_a_bounded_condition_number() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.json", SMALL);
    let o = run(&["spectrum"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cond = report["cond"].as_f64().unwrap();
    assert!(cond >= 1.0 && cond < 50.0, "cond {cond}");
    assert_eq!(report["eigenvalues"].as_array().unwrap().len() as u64, report["dofs"].as_u64().unwrap());
}

#[test]
fn decay_reports_each_column() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "decay.json",
        r#"{"problem":"elliptic2d","model":"model1","n":3,"m":2,"mu":2,"variant":"psi_global"}"#,
    );
    let out = dir.path().join("report.json");
    let o = bin().args(["decay", "--k", "1,2", "--out"]).arg(&out).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let columns = report["columns"].as_array().unwrap();
    assert!(!columns.is_empty());
    assert!(columns.iter().all(|c| c["errors"].as_array().unwrap().len() == 2));
}
