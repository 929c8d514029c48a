use std::path::PathBuf;
use std::process::{Command, Output};

fn pressure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pressure")).args(args).env("PRESSURE_THREADS", "1").output().expect("binary runs")
}

fn system(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "systems", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn records(out: &Output) -> Vec<serde_json::Value> {
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    v["records"].as_array().unwrap().clone()
}

#[test]
fn packing_pressure_of_full_shift_is_log_two() {
    let out = pressure(&["compute", "--system", &system("full-2-shift.json"), "--set", "X", "--quantity", "packing"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    let value = recs[0]["value"].as_f64().unwrap();
    assert!((value - 2f64.ln()).abs() < 1e-6, "{value}");
}

#[test]
fn empty_set_reports_minus_infinity() {
    let out = pressure(&["compute", "--system", &system("full-2-shift.json"), "--set", "empty", "--quantity", "bowen,packing"]);
    assert_eq!(out.status.code(), Some(0));
    for r in records(&out) {
        assert_eq!(r["value"], "-inf");
        assert_eq!(r["bracket"][0], "-inf");
    }
}

#[test]
fn compute_output_is_deterministic() {
    let args = ["compute", "--system", &system("golden-mean.json"), "--quantity", "bowen,capacity-upper,local-lower", "--seed", "3"];
    let (a, b) = (pressure(&args), pressure(&args));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_document_exits_with_input_status() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{ "name": "bad", "alphabet": 2, "matrix": [[1, 1]] "#).unwrap();
    let out = pressure(&["compute", "--system", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_schedules_exit_with_input_status() {
    let sys = system("full-2-shift.json");
    assert_eq!(pressure(&["compute", "--system", &sys, "--m-list", "2,1"]).status.code(), Some(2));
    assert_eq!(pressure(&["compute", "--system", &sys, "--delta-list", "0.2,0.5"]).status.code(), Some(2));
    assert_eq!(pressure(&["compute", "--system", &sys, "--set", "nowhere"]).status.code(), Some(2));
}

#[test]
fn tight_tolerance_reports_inconclusive() {
    let out = pressure(&["compute", "--system", &system("full-2-shift.json"), "--measure", "bernoulli-0.3", "--quantity", "katok-bowen", "--n-max", "16", "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn report_writes_identical_csv_twice() {
    let dir = tempfile::tempdir().unwrap();
    let result = dir.path().join("run.json");
    let out = pressure(&["compute", "--system", &system("full-2-shift-weighted.json"), "--quantity", "bowen,capacity-lower", "--out", result.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    for d in [&first, &second] {
        let out = pressure(&["report", "--input", result.to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["bowen.csv", "capacity-lower.csv"] {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(second.join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn report_of_missing_file_exits_with_input_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = pressure(&["report", "--input", "/nonexistent/run.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_with_input_status() {
    assert_eq!(pressure(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn fast_suite_passes_and_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.json");
    let out = pressure(&["verify", "chain", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(report["suite"], "chain");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{ "set": ["fixed-point"], "quantity": ["bowen"] }"#).unwrap();
    let out = pressure(&["compute", "--system", &system("full-2-shift.json"), "--set", "X", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["set"], "fixed-point");
    assert!(recs[0]["value"].as_f64().unwrap().abs() < 1e-9);
}
