//! Runs the recursion in both arithmetic modes and reports the largest
//! float deviation from the exact coefficients.
//!
//!     cargo run --example exact_vs_float

use mset_area::engine::{run, BatchPlan, BetaTable};
use mset_area::DyadicRational;

fn main() {
    let m_target = 1024;
    let plan = BatchPlan::new(4, 2).unwrap();

    let mut exact = BetaTable::<DyadicRational>::new();
    run(&mut exact, m_target, &plan, 1).unwrap();
    let mut float = BetaTable::<f64>::new();
    run(&mut float, m_target, &plan, 1).unwrap();

    let mut worst = (0usize, 0.0f64);
    for (m, (e, f)) in exact
        .coefficients()
        .iter()
        .zip(float.coefficients())
        .enumerate()
    {
        let err = (e.to_f64().unwrap() - f).abs();
        if err > worst.1 {
            worst = (m, err);
        }
    }
    println!("coefficients through m = {m_target}");
    println!("largest float error: {:.3e} at m = {}", worst.1, worst.0);
    println!(
        "exact b_{} = {}",
        worst.0,
        exact.coefficients()[worst.0]
    );
}
