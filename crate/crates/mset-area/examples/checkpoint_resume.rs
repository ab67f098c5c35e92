//! Demonstrates checkpointed runs: compute half the target, save, reload,
//! finish, and confirm the result matches an uninterrupted run.
//!
//!     cargo run --example checkpoint_resume

use mset_area::engine::{
    checkpoint_load, checkpoint_save, run, BatchPlan, BetaTable,
};

fn main() {
    let plan = BatchPlan::new(4, 2).unwrap();
    let dir = std::env::temp_dir().join("mset-area-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("halfway.ck");

    let mut first = BetaTable::<f64>::new();
    run(&mut first, 5_000, &plan, 1).unwrap();
    checkpoint_save(&first, &path).unwrap();
    println!("saved checkpoint at m = {}", first.m_done());

    let mut resumed: BetaTable<f64> = checkpoint_load(&path).unwrap();
    println!("reloaded checkpoint at m = {}", resumed.m_done());
    run(&mut resumed, 10_000, &plan, 1).unwrap();

    let mut straight = BetaTable::<f64>::new();
    run(&mut straight, 10_000, &plan, 1).unwrap();
    assert_eq!(resumed.coefficients(), straight.coefficients());
    println!("resumed run matches the uninterrupted run bit for bit");

    std::fs::remove_file(&path).ok();
}
