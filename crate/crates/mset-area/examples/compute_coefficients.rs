//! Computes the first coefficients of the exterior map exactly and prints
//! them as dyadic rationals alongside their float values.
//!
//!     cargo run --example compute_coefficients

use mset_area::engine::{run, BatchPlan, BetaTable};
use mset_area::DyadicRational;

fn main() {
    let mut table = BetaTable::<DyadicRational>::new();
    run(&mut table, 17, &BatchPlan::new(4, 2).unwrap(), 1).unwrap();

    println!("{:>3}  {:>24}  {:>24}", "m", "b_m (exact)", "b_m (float)");
    for (m, b) in table.coefficients().iter().enumerate().take(16) {
        println!("{m:>3}  {:>24}  {:>24.17e}", b.to_string(), b.to_f64().unwrap());
    }
}
