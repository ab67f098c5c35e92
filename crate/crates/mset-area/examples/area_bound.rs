//! Runs the float-mode recursion and prints the area upper bounds
//! A_N = pi (1 - sum m b_m^2) at a few sample points.
//!
//!     cargo run --example area_bound

use mset_area::area::{accumulate, CoeffStream};
use mset_area::engine::{run, BatchPlan, BetaTable};

fn main() {
    let m_target = 50_000;
    let mut table = BetaTable::<f64>::new();
    run(&mut table, m_target, &BatchPlan::new(4, 2).unwrap(), 1).unwrap();

    let stream = CoeffStream::Float(table.coefficients().to_vec());
    let points = [10, 100, 1000, 10_000, 49_999];
    let series = accumulate(&stream, &points).unwrap();

    println!("N,A_N");
    for s in series.samples() {
        println!("{},{:.9e}", s.n, s.area);
    }
    println!();
    println!("the bound decreases toward the true area (~1.5066 by pixel counting)");
}
