//! Runs the full validation suite on a fresh exact run and prints the
//! report as JSON.
//!
//!     cargo run --example validate_suite

use mset_area::cli::{cmd_validate, ValidateArgs};

fn main() {
    let args = ValidateArgs {
        coefficients: None,
        m_target: 512,
        checks: vec![], // empty selects every check the mode supports
        workers: 1,
        out: None,
        allow_large_exact: false,
    };
    let report = cmd_validate(&args).unwrap();
    for check in &report.checks {
        println!(
            "{:<24} {:<20} {}",
            check.name,
            check.range,
            if check.passed { "pass" } else { "FAIL" }
        );
    }
    println!();
    println!("overall: {}", if report.passed { "pass" } else { "FAIL" });
}
