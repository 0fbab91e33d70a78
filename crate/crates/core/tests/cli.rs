use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cat-discord"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

/// Parses a single-row CSV into (header, values).
fn single_row(out: &Output) -> Vec<(String, String)> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(lines.next().is_none());
    header.iter().zip(row).map(|(h, v)| (h.to_string(), v.to_string())).collect()
}

fn field(row: &[(String, String)], name: &str) -> f64 {
    row.iter().find(|(h, _)| h == name).unwrap().1.parse().unwrap()
}

fn flags(row: &[(String, String)]) -> String {
    row.iter().find(|(h, _)| h == "flags").unwrap().1.clone()
}

#[test]
fn compute_bell() {
    let out = run(&["compute", "--n", "2", "--k", "2", "--p", "0", "--parity", "even"]);
    assert!(out.status.success());
    let row = single_row(&out);
    for col in ["dg_recursive", "dg_encoded", "dg_brute"] {
        assert!((field(&row, col) - 0.5).abs() < 1e-10, "{col}");
    }
    assert_eq!(flags(&row), "");
}

#[test]
fn compute_reduced_ghz() {
    let out = run(&["compute", "--n", "3", "--k", "2", "--p", "0", "--parity", "even"]);
    assert!(out.status.success());
    let row = single_row(&out);
    for col in ["dg_recursive", "dg_encoded", "dg_brute"] {
        assert!(field(&row, col).abs() < 1e-10, "{col}");
    }
}

#[test]
fn compute_two_qubit_value() {
    let out = run(&["compute", "--n", "4", "--k", "2", "--p", "0.5", "--parity", "even"]);
    assert!(out.status.success());
    let row = single_row(&out);
    for col in ["dg_recursive", "dg_encoded", "dg_brute"] {
        assert!((field(&row, col) - 0.1323529).abs() < 1e-7, "{col}");
    }
    assert!((field(&row, "k3") - 164.0 / 289.0).abs() < 1e-14);
    assert_eq!(field(&row, "e3"), 1.0);
}

#[test]
fn compute_json() {
    let out = run(&["compute", "--n", "4", "--k", "3", "--p", "0.5", "--format", "json", "--method", "recursive"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v.as_array().unwrap()[0];
    assert!((row["dg_recursive"].as_f64().unwrap() - 225.0 / 1156.0).abs() < 1e-14);
    assert!(row["dg_brute"].is_null());
}

#[test]
fn invalid_flags_exit_2() {
    assert_eq!(run(&["compute", "--n", "3", "--k", "2", "--p", "0", "--parity", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--n", "3", "--k", "5", "--p", "0.2"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--n", "3", "--k", "2", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--n", "3", "--k", "2"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--n", "3", "--k", "2", "--p-steps", "0"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--max-n", "11"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn singular_spec_exit_3() {
    let out = run(&["compute", "--n", "3", "--k", "2", "--p", "1", "--parity", "odd"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn sweep_flags_singular_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = bin()
        .args(["sweep", "--n", "3", "--k", "2", "--p-start", "0.5", "--p-end", "1", "--p-steps", "3"])
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",singular")).count(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped singular point"));
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let args = ["sweep", "--n", "5,4", "--k", "2,3,4", "--p-steps", "11"];
    let one = bin().args(args).args(["--jobs", "1"]).output().unwrap();
    let four = bin().args(args).args(["--jobs", "4"]).output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn sweep_rows_agree_across_methods() {
    let out = run(&["sweep", "--n", "6", "--k", "2,3,4", "--p-steps", "21"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        rows += 1;
        if cols[15] == "singular" {
            continue;
        }
        assert_eq!(cols[15], "", "{line}");
        let diff: f64 = cols[10].parse().unwrap();
        assert!(diff <= 1e-8, "{line}");
        let p: f64 = cols[2].parse().unwrap();
        if p == 0.0 {
            let dg: f64 = cols[7].parse().unwrap();
            assert!(dg.abs() < 1e-12, "{line}");
        }
    }
    assert_eq!(rows, 21 * 3 * 2);
}

#[test]
fn validate_json_and_fault_injection() {
    let out = run(&["validate", "--max-n", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["failures"], 0);
    assert!(v["checks"].as_u64().unwrap() > 500);

    let bad = run(&["validate", "--max-n", "4", "--inject-fault", "1e-6"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.contains("FAIL recursion_mismatch"));
    let listed = text.lines().skip_while(|l| !l.starts_with("first violations")).skip(1).count();
    assert_eq!(listed, 10);
}
