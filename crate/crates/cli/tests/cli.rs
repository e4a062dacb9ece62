use std::io::Write as _;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn satloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satloc")).args(args).output().expect("binary runs")
}

fn instance_file(json: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const GADGET: &str = r#"{"setting":"obnoxious","variant":"sum","agents":[["1/6","1/6","5/6"],["5/6","5/6","5/6"]]}"#;

#[test]
fn solve_prints_exact_rationals() {
    let f = instance_file(GADGET);
    let out = satloc(&["solve", "--instance", f.path().to_str().unwrap(), "--objective", "ss"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("location: 0"), "{text}");
    assert!(text.contains("value: 10/7 (1.428571)"), "{text}");

    let out = satloc(&["solve", "--instance", f.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(stdout(&out), "objective,location,value\nss,0,10/7\n");
}

#[test]
fn run_prints_lottery_and_expectations() {
    let f = instance_file(r#"{"setting":"obnoxious","variant":"sum","agents":[["0","1"],["0","1/2"]]}"#);
    let out = satloc(&["run", "--mechanism", "M5", "--instance", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("0 with probability 1/2"), "{text}");
    assert!(text.contains("expected SS: 3/2"), "{text}");
    assert!(text.contains("expected MS: 1/2"), "{text}");

    let out = satloc(&["run", "--mechanism", "m5", "--instance", f.path().to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["satisfaction"]["ss"], "3/2");
}

#[test]
fn ratio_sweep_csv_and_seed_determinism() {
    let args = ["ratio", "--mechanism", "M4", "--objective", "ss", "--samples", "200", "--seed", "42"];
    let a = satloc(&args);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mechanism,objective,samples,worst_ratio_num,worst_ratio_den,instance,seed"));
    assert!(lines.next().unwrap().starts_with("M4,ss,"));

    let b = Command::new(env!("CARGO_BIN_EXE_satloc")).args(args).args(["--jobs", "1"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_satloc")).args(args).env("SATLOC_JOBS", "3").output().unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn search_reports_unbounded_off_label() {
    let out = satloc(&["search", "--mechanism", "M4", "--objective", "ms", "--samples", "20", "--iterations", "100"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains(",unbounded,,"));
}

#[test]
fn check_sp_exit_codes() {
    let f = instance_file(r#"{"setting":"desirable","variant":"sum","agents":[["1/2","1"],["0","1/2"],["0","1"]]}"#);
    let out = satloc(&["check-sp", "--mechanism", "M1", "--instance", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: sp_holds"));

    let out = satloc(&["check-gsp", "--mechanism", "M1", "--instance", f.path().to_str().unwrap(), "--budget", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict: inconclusive"));

    let out = satloc(&["check-gsp", "--mechanism", "M1", "--instance", f.path().to_str().unwrap(), "--coalition-size", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bounds_reports_margin() {
    let out = satloc(&["bounds", "--theorem", "7", "--grid", "24", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("bound: 17/16"), "{text}");
    assert!(text.contains("margin: +0.000000"), "{text}");

    let out = satloc(&["bounds", "--theorem", "10", "--grid", "64", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["bound"].as_f64().unwrap() > 1.04);

    assert_eq!(satloc(&["bounds", "--theorem", "8"]).status.code(), Some(2));
    assert_eq!(satloc(&["bounds", "--theorem", "10", "--epsilon", "1/2"]).status.code(), Some(2));
}

#[test]
fn paper_tables_succeeds() {
    let out = satloc(&["paper-tables", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("Table 1") && text.contains("Table 2"));
    assert!(text.contains("reproduced"));
    assert!(!text.contains("MISMATCH"));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(satloc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(satloc(&["solve"]).status.code(), Some(2));
    assert_eq!(satloc(&["run", "--mechanism", "M9", "--instance", "x"]).status.code(), Some(2));
    assert_eq!(satloc(&["solve", "--instance", "/definitely/missing.json"]).status.code(), Some(2));

    let bad = instance_file(r#"{"setting":"desirable","variant":"sum","agents":[["1/0"]]}"#);
    let out = satloc(&["solve", "--instance", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("agents[0][0]"));

    assert_eq!(satloc(&["--help"]).status.code(), Some(0));
}
