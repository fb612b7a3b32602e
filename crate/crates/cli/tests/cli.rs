use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hodge-afem")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn adapt_refines_every_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["adapt", "--domain", "lshape", "--eps", "1e-9", "--max-iter", "10", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let cells: Vec<usize> = csv_column(&dir.path().join("history.csv"), "cells").iter().map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells.len(), 11);
    assert!(cells.windows(2).all(|w| w[1] > w[0]));
    for file in ["mesh.json", "manifest.json", "report.json"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
    assert!(stdout(&o).contains("rates vs dofs"));
}

#[test]
fn adapt_with_loose_tolerance_records_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["adapt", "--domain", "square", "--eps", "1e9", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_column(&dir.path().join("history.csv"), "k"), ["0"]);
}

#[test]
fn adapt_output_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(&["adapt", "--domain", "lshape", "--f", "sinsin", "--eps", "1e-9", "--max-iter", "6", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(a.path().join("history.csv")).unwrap(), fs::read(b.path().join("history.csv")).unwrap());
}

#[test]
fn verify_suites_exit_cleanly() {
    for suite in ["harmonics", "marking", "all"] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["verify", "--suite", suite, "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{suite}: {}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains("checks passed"));
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert!(report.is_object());
    }
}

#[test]
fn rates_of_a_synthetic_history() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let mut text = String::from("k,cells,dofs_sigma,dofs_u,error_sq,E_sq,eta_sq,osc_sq,osc_hat_sq,marked,q\n");
    for k in 0..6 {
        let n = 100usize << (2 * k);
        text += &format!("{k},{n},{n},{n},{},,{},0,,1,\n", 1.0 / (2 * n) as f64, 4.0 / (2 * n) as f64);
    }
    fs::write(&path, text).unwrap();
    let o = run(&["rates", path.to_str().unwrap(), path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("error -0.50"), "{s}");
    assert!(s.contains("eta -0.50"), "{s}");
    assert!(s.contains("difference"));
}

#[test]
fn empty_history_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    fs::write(&path, "").unwrap();
    let o = run(&["rates", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty.csv"));
}

#[test]
fn configuration_errors_exit_one() {
    let cases: [&[&str]; 5] = [
        &["adapt", "--domain", "torus"],
        &["adapt", "--f", "nonsense", "--eps", "1e9"],
        &["adapt", "--theta", "1.5", "--eps", "1e9"],
        &["verify", "--suite", "everything"],
        &["rates", "/nonexistent/history.csv"],
    ];
    for args in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut a = args.to_vec();
        if args[0] != "rates" {
            a.extend(["--out", dir.path().to_str().unwrap()]);
        }
        let o = run(&a);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}
