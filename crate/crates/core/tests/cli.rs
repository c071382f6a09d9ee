use std::io::Write;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_trunclife");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stderr_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .map(str::to_owned)
        .collect()
}

fn assert_single_error(out: &Output, needle: &str) {
    assert_eq!(out.status.code(), Some(2));
    let lines = stderr_lines(out);
    assert_eq!(lines.len(), 1, "{lines:?}");
    assert!(lines[0].starts_with("error: "), "{lines:?}");
    assert!(lines[0].contains(needle), "{lines:?}");
}

#[test]
fn missing_input_file() {
    let out = run(&[
        "estimate",
        "--input",
        "/definitely/missing.csv",
        "--s",
        "2",
        "--G",
        "5",
    ]);
    assert_single_error(&out, "cannot open");
}

#[test]
fn window_must_contain_the_study() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    std::fs::write(&path, "y,l,r\n0.5,0,0\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        path.to_str().unwrap(),
        "--s",
        "2",
        "--G",
        "1",
    ]);
    assert_single_error(&out, "study window");
}

#[test]
fn unknown_flag_is_one_line() {
    let out = run(&["estimate", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_lines(&out).len(), 1);
}

#[test]
fn malformed_row_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    std::fs::write(&path, "y,l,r\n0.5,0,0\n0.7,2,0\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        path.to_str().unwrap(),
        "--s",
        "2",
        "--G",
        "5",
    ]);
    assert_single_error(&out, "line 3");
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&[
            "simulate",
            "--theta0",
            "0.3",
            "--s",
            "2",
            "--G",
            "10",
            "--n",
            "100000",
            "--seed",
            "7",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{:?}", stderr_lines(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn estimate_reads_stdin_and_matches_json() {
    let sim = run(&[
        "simulate", "--theta0", "0.3", "--s", "2", "--G", "10", "--n", "20000", "--seed", "3",
    ]);
    assert!(sim.status.success());
    let estimate = |format: &str| {
        let mut child = Command::new(BIN)
            .args([
                "estimate", "--input", "-", "--s", "2", "--G", "10", "--format", format,
            ])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(&sim.stdout).unwrap();
        let out = child.wait_with_output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let json: serde_json::Value = serde_json::from_str(&estimate("json")).unwrap();
    let text = estimate("text");
    let theta_line = text.lines().find(|l| l.starts_with("theta_hat")).unwrap();
    let theta_text: f64 = theta_line
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(theta_text, json["theta_hat"].as_f64().unwrap());
    assert!((theta_text - 0.3).abs() < 0.03);
    for key in [
        "theta_hat",
        "se",
        "alpha_hat",
        "n_hat",
        "ci_low",
        "ci_high",
        "m",
        "converged",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn reproduce_enterprise_passes() {
    let out = run(&["reproduce-enterprise"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines()
            .filter(|l| l.trim_end().ends_with("yes"))
            .count(),
        7
    );
}

#[test]
fn expand_table_matches_bundled_records() {
    let out = run(&["expand-table"]);
    assert!(out.status.success());
    let recs = trunclife::dataio::parse_records(out.stdout.as_slice()).unwrap();
    assert_eq!(recs, trunclife::dataio::enterprise_records().unwrap());
}

#[test]
fn mc_study_writes_standardized_values() {
    let dir = tempfile::tempdir().unwrap();
    let z = dir.path().join("z.txt");
    let out = run(&[
        "mc-study",
        "--theta0",
        "0.3",
        "--s",
        "2",
        "--G",
        "10",
        "--n",
        "5000",
        "--seed",
        "1",
        "--reps",
        "20",
        "--standardized",
        z.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{:?}", stderr_lines(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let failures = report["failures"].as_u64().unwrap() as usize;
    let lines = std::fs::read_to_string(&z).unwrap().lines().count();
    assert_eq!(lines, 20 - failures);
}

#[test]
fn verify_prints_one_line_per_check() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let checks = text
        .lines()
        .filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL "))
        .count();
    assert!(checks > 50);
    assert!(text.lines().last().unwrap().ends_with("0 failed"));
}
