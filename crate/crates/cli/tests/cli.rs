//! End-to-end runs of the binary against checked-in golden output.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_naphase"))
}

fn dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn golden(name: &str, args: &[&str]) {
    let first = run(args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = run(args);
    assert_eq!(first.stdout, second.stdout, "output differs between runs");
    let path = dir("golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &first.stdout).unwrap();
    }
    let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert!(expected == first.stdout, "{name} differs from golden output:\n{}", String::from_utf8_lossy(&first.stdout));
}

#[test]
fn phase_verify_square() {
    golden("phase_verify_square.jsonl", &["--p", "7", "--f", "x1^2", "phase-verify"]);
}

#[test]
fn phase_verify_binary_form_csv() {
    golden("phase_verify_binary.csv", &["--p", "5", "--f", "x1^2 + x1*x2 + x2^2", "--csv", "phase-verify"]);
}

#[test]
fn gauss_closed_and_brute() {
    golden("gauss.jsonl", &["--p", "5", "gauss", "--ord-c=-4", "--alpha=1"]);
}

#[test]
fn uniform_square() {
    golden("uniform_square.jsonl", &["--f", "x1^2", "uniform", "--primes", "3,5,7,11,13"]);
}

#[test]
fn critical_points_of_cubic() {
    golden("critical_cubic.jsonl", &["--p", "7", "--f", "x1^3 - 3*x1", "critical"]);
}

#[test]
fn morse_laurent() {
    golden("morse_laurent.jsonl", &["--field", "laurent", "--p", "5", "--f", "x1^2 + x1^3", "--degree", "6", "morse"]);
}

#[test]
fn fourier_of_two_balls() {
    let phi = dir("jobs").join("ball.json");
    golden("fourier.jsonl", &["--p", "3", "--phi-file", phi.to_str().unwrap(), "fourier"]);
}

#[test]
fn config_file_with_flag_override() {
    let job = dir("jobs").join("two_balls.json");
    golden("integrate_two_balls.csv", &["--config", job.to_str().unwrap(), "--lambda-ord", "-3..-2", "--csv", "integrate"]);
}

#[test]
fn two_ball_certificate_from_config() {
    let job = dir("jobs").join("two_balls.json");
    let out = run(&["--config", job.to_str().unwrap(), "phase-verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let summary: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["checked"], 3 * 6);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["--f", "1/x1", "--p", "7", "critical"][..],
        &["--p", "4", "--f", "x1^2", "critical"],
        &["--f", "x1^2", "critical"],
        &["--p", "7", "--f", "x1^2", "--lambda-ord", "3..1", "integrate"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
    let out = run(&["--f", "x1 +* 2", "--p", "7", "critical"]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("1:5"));
}

#[test]
fn records_outside_the_guarantee_are_not_failures() {
    // N = -1 here; at ord λ = 1 the integral is 1 while the formula gives 1/5
    let out = run(&["--p", "5", "--f", "x1^2", "--lambda-ord", "0..1", "phase-verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let unguaranteed: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["type"] == "lambda")
        .collect();
    assert_eq!(unguaranteed.len(), 8);
    assert!(unguaranteed.iter().all(|v| v["guaranteed"] == false));
    assert!(unguaranteed.iter().any(|v| v["equal"] == false));
}
