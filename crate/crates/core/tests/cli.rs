use std::path::PathBuf;
use std::process::{Command, Output};

fn opquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opquad")).args(args).output().unwrap()
}

fn config(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "configs", name].iter().collect();
    path.to_string_lossy().into_owned()
}

#[test]
fn rule_is_byte_identical_across_runs() {
    let cfg = config("fractional.json");
    let a = opquad(&["rule", "--config", &cfg, "--inner", "g2"]);
    let b = opquad(&["rule", "--config", &cfg, "--inner", "g2"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("index,node,weight\n"));
}

#[test]
fn sweep_writes_grid_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let run = opquad(&["sweep", "--config", &config("fractional.json"), "--out", out.to_str().unwrap()]);
    assert!(run.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "y,g1,g2");
    assert_eq!(lines.len(), 132);
    assert_eq!(lines[1], "0.0,0.0,0.0");
}

#[test]
fn table1_prefix() {
    let run = opquad(&["table1", "--n", "2"]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|s| s.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(((rows[2][1] - 9.424586790473777E-01) / 9.424586790473777E-01).abs() < 1e-7);
    assert!((rows[2][2] - (0.9426091069801061 - rows[2][1])).abs() <= 2.5e-16);
}

#[test]
fn check_reports_and_exit_status() {
    let run = opquad(&["check", "--config", &config("table1.json"), "--n", "6", "--precision", "256"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["range_ok"], true);
    assert_eq!(report["functions"][0]["sup"], 1.0);
    assert_eq!(report["functions"][1]["sup"], 2.0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"basis_kind": "monomials", "basis_size": 3, "extra": true}"#).unwrap();
    let run = opquad(&["check", "--config", bad.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("extra"));
}
