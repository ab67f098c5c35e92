//! Escape-time pixel counting over a grid, the classical estimate the
//! series bound is compared against.
//!
//!     cargo run --example pixel_count

use mset_area::pixel::{estimate_area, GridSpec};

fn main() {
    println!("{:>10} {:>10} {:>12}", "grid", "max_iter", "estimate");
    for (resolution, max_iter) in [(256, 1000), (512, 5000), (1024, 20_000)] {
        let spec = GridSpec::half_plane(resolution, max_iter).unwrap();
        let estimate = estimate_area(&spec);
        println!("{resolution:>7}^2 {max_iter:>10} {estimate:>12.6}");
    }
    println!();
    println!("reference high-resolution value: 1.50659");
}
