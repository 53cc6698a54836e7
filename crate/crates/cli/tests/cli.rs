use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fop")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn history_rows(path: &Path) -> Vec<(usize, f64, String)> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["k", "residual_norm", "event"]);
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].to_string())
        })
        .collect()
}

#[test]
fn identity_solves_in_one_iteration() {
    let out = fop(&["solve", "--gen", "identity:8", "--rhs", "ones"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "converged");
    assert!(report["iterations"].as_u64().unwrap() <= 1);
    assert_eq!(report["matrix"]["rows"], 8);
}

#[test]
fn report_and_history_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let history = dir.path().join("history.csv");
    let solution = dir.path().join("x.txt");
    let out = fop(&[
        "solve",
        "--gen",
        "tridiag:30",
        "--rhs",
        "ones",
        "--tol",
        "1e-8",
        "--report",
        report.to_str().unwrap(),
        "--history",
        history.to_str().unwrap(),
        "--solution",
        solution.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let json = read_json(&report);
    assert_eq!(json["status"], "converged");
    assert!(json["final_residual"].as_f64().unwrap() <= 1e-8);
    for key in ["iterations", "restarts", "restart_events", "config", "matrix"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["config"]["tol"], 1e-8);
    assert_eq!(json["config"]["rhs"], "ones");
    assert_eq!(json["matrix"]["source"], "tridiag:30");
    assert_eq!(json["matrix"]["nnz"], 88);

    let rows = history_rows(&history);
    assert_eq!(rows[0].2, "init");
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    assert_eq!(rows.last().unwrap().0 as u64, json["iterations"].as_u64().unwrap());

    // tridiag(-1, 2, -1) x = 1 has x_i = i (n + 1 - i) / 2
    let x: Vec<f64> = fs::read_to_string(&solution).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(x.len(), 30);
    for (i, xi) in x.iter().enumerate() {
        let exact = ((i + 1) * (30 - i)) as f64 / 2.0;
        assert!((xi - exact).abs() <= 1e-6 * exact, "x[{i}] = {xi}, expected {exact}");
    }
}

#[test]
fn report_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = fop(&["solve", "--gen", "randsdd:12,4", "--rhs", "rand:9", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&report).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(parsed, again);
}

#[test]
fn large_tridiagonal_history_is_strictly_increasing() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let history = dir.path().join("history.csv");
    let out = fop(&[
        "solve",
        "--gen",
        "tridiag:50",
        "--rhs",
        "ones",
        "--tol",
        "1e-8",
        "--report",
        report.to_str().unwrap(),
        "--history",
        history.to_str().unwrap(),
    ]);
    let json = read_json(&report);
    let expected = match json["status"].as_str().unwrap() {
        "converged" => 0,
        "max_iterations" => 1,
        _ => 2,
    };
    assert_eq!(code(&out), expected);
    let rows = history_rows(&history);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn same_seed_gives_identical_history() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        fop(&[
            "solve",
            "--gen",
            "randsdd:40,11",
            "--tol",
            "1e-12",
            "--seed",
            "42",
            "--history",
            path.to_str().unwrap(),
        ]);
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn matrix_market_input() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("a.mtx");
    fs::write(&mtx, "%%MatrixMarket matrix coordinate real general\n% 2x2\n2 2 3\n1 1 4.0\n1 2 1.0\n2 2 3.0\n")
        .unwrap();
    let rhs = dir.path().join("b.txt");
    fs::write(&rhs, "# right-hand side\n5.0\n3.0\n").unwrap();
    let out = fop(&["solve", "--matrix", mtx.to_str().unwrap(), "--rhs", &format!("file:{}", rhs.display())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["matrix"]["nnz"], 3);
}

#[test]
fn missing_matrix_is_an_input_error() {
    let out = fop(&["solve", "--matrix", "missing.mtx"]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.mtx"));
}

#[test]
fn malformed_matrix_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("bad.mtx");
    fs::write(&mtx, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 1.0\n").unwrap();
    let out = fop(&["solve", "--matrix", mtx.to_str().unwrap()]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let rhs = dir.path().join("b.txt");
    fs::write(&rhs, "1.0\nnope\n").unwrap();
    let out = fop(&["solve", "--gen", "identity:2", "--rhs", &format!("file:{}", rhs.display())]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&fop(&["solve"])), 64);
    assert_eq!(code(&fop(&["solve", "--gen", "identity:3", "--matrix", "a.mtx"])), 64);
    assert_eq!(code(&fop(&["solve", "--gen", "wave:3"])), 64);
    assert_eq!(code(&fop(&["solve", "--gen", "identity:3", "--rhs", "zeros"])), 64);
    assert_eq!(code(&fop(&["solve", "--gen", "identity:3", "--tol", "-1"])), 64);
    assert_eq!(code(&fop(&["solve", "--gen", "identity:3", "--max-iter", "many"])), 64);
    assert_eq!(code(&fop(&["frobnicate"])), 64);
    assert_eq!(code(&fop(&["--help"])), 0);
}

#[test]
fn rhs_length_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let rhs = dir.path().join("b.txt");
    fs::write(&rhs, "1 2 3\n").unwrap();
    let out = fop(&["solve", "--gen", "identity:2", "--rhs", &format!("file:{}", rhs.display())]);
    assert_eq!(code(&out), 65);
}

#[test]
fn iteration_cap_exits_1() {
    let out = fop(&["solve", "--gen", "tridiag:40", "--max-iter", "6"]);
    assert_eq!(code(&out), 1);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["status"], "max_iterations");
    assert_eq!(json["iterations"], 6);
}

#[test]
fn verify_reproduces_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.json");
    let out = fop(&["verify", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8_lossy(&out.stdout);
    for form in ["A11", "A13", "A14", "B11", "B13"] {
        assert!(table.lines().any(|l| l.starts_with(form) && l.trim_end().ends_with("yes")), "{form}\n{table}");
    }
    let json = read_json(&report);
    assert_eq!(json["all_match"], true);
    let forms = json["forms"].as_array().unwrap();
    let a13 = forms.iter().find(|f| f["form"] == "A13").unwrap();
    assert_eq!(a13["consensus"], "exists");
    assert!(a13["median_residual"].as_f64().unwrap() < 1e-8);
    let a11 = forms.iter().find(|f| f["form"] == "A11").unwrap();
    assert!(a11["nonexistent_count"].as_u64().unwrap() >= 19);
}
