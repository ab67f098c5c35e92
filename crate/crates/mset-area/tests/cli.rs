//! End-to-end tests of the `mset-area` binary.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mset-area"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn compute_exact_small_writes_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coeffs.csv");
    let status = bin()
        .args(["compute", "--m-target", "16", "--mode", "exact", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,b_m"));
    assert_eq!(lines.next(), Some("0,-1/2^1"));
    assert_eq!(lines.next(), Some("1,1/2^3"));
    assert!(text.contains("4,0/2^0"));
    assert_eq!(text.lines().count(), 17); // header + b_0..b_15
}

#[test]
fn invalid_plan_is_rejected() {
    let status = bin()
        .args([
            "compute",
            "--m-target",
            "16",
            "--width",
            "8",
            "--threshold",
            "2",
        ])
        .current_dir(tempfile::tempdir().unwrap().path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn exact_cap_is_enforced() {
    let status = bin()
        .args(["compute", "--m-target", "5000", "--mode", "exact"])
        .current_dir(tempfile::tempdir().unwrap().path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn compute_area_validate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("coeffs.csv");
    let area = dir.path().join("area.csv");
    let report = dir.path().join("report.json");

    let status = bin()
        .args(["compute", "--m-target", "256", "--mode", "exact", "--out"])
        .arg(&coeffs)
        .status()
        .unwrap();
    assert!(status.success());

    let status = bin()
        .args(["area", "--sample-points", "16,64,255", "--coefficients"])
        .arg(&coeffs)
        .arg("--out")
        .arg(&area)
        .status()
        .unwrap();
    assert!(status.success());
    let area_text = read(&area);
    assert_eq!(area_text.lines().next(), Some("N,A_N"));
    assert_eq!(area_text.lines().count(), 4);
    let bounds: Vec<f64> = area_text
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.parse().unwrap())
        .collect();
    assert!(bounds.windows(2).all(|w| w[1] <= w[0]));
    assert!(bounds.iter().all(|a| *a < std::f64::consts::PI && *a > 1.5));

    let status = bin()
        .args(["validate", "--coefficients"])
        .arg(&coeffs)
        .args(["--out"])
        .arg(&report)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value = serde_json::from_str(&read(&report)).unwrap();
    assert_eq!(json["passed"], true);
    assert!(json["checks"].as_array().unwrap().len() >= 5);
}

#[test]
fn corrupted_csv_fails_validation_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("coeffs.csv");
    let status = bin()
        .args(["compute", "--m-target", "64", "--mode", "exact", "--out"])
        .arg(&coeffs)
        .status()
        .unwrap();
    assert!(status.success());

    // corrupt b_1: deepen its denominator past the valuation bound
    let text = read(&coeffs).replace("1,1/2^3", "1,1/2^9");
    std::fs::write(&coeffs, text).unwrap();

    let output = bin()
        .args(["validate", "--checks", "valuations", "--coefficients"])
        .arg(&coeffs)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["passed"], false);
}

#[test]
fn pixel_emits_json_estimate() {
    let output = bin()
        .args(["pixel", "--resolution", "64", "--max-iter", "300"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["resolution"][0], 64);
    assert_eq!(json["max_iter"], 300);
    let est = json["estimate"].as_f64().unwrap();
    assert!(est > 1.0 && est < 3.0, "estimate {est}");
}

#[test]
fn checkpointed_run_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("run.ck");
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let straight = dir.path().join("straight.csv");

    let status = bin()
        .args(["compute", "--m-target", "500", "--checkpoint-interval", "100"])
        .arg("--checkpoint")
        .arg(&ck)
        .arg("--out")
        .arg(&first)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(ck.exists());

    let status = bin()
        .args(["compute", "--m-target", "900", "--checkpoint-interval", "100"])
        .arg("--checkpoint")
        .arg(&ck)
        .arg("--out")
        .arg(&second)
        .status()
        .unwrap();
    assert!(status.success());

    let status = bin()
        .args(["compute", "--m-target", "900", "--out"])
        .arg(&straight)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&second), read(&straight));
}
