//! Area upper bounds for the Mandelbrot set.
//!
//! The exterior of the set is the image of the complement of the closed
//! unit disk under a conformal map `psi(z) = z + sum b_m z^{-m}`; the area
//! of the set is bounded above by `A_N = pi (1 - sum_{m=1}^N m b_m^2)`.
//! This crate computes the coefficients `b_m` through a backward recursion
//! over a two-dimensional table `beta_{n,m}`, in 64-bit floats or exact
//! dyadic rationals, with a column-batch parallel schedule, checkpointing,
//! an independent validation suite, and an escape-time pixel comparator.
//!
//! Entry points:
//! - [`engine::run`] fills a [`engine::BetaTable`]; `b_m` is row 0.
//! - [`area::accumulate`] turns the coefficient stream into `A_N` samples.
//! - [`oracle`] holds the independent checks (closed forms, valuation
//!   theorems, a contour-integral oracle, float-vs-exact audit).
//! - [`pixel::estimate_area`] is the classical pixel-counting baseline.
//! - [`cli`] backs the `mset-area` binary.
//!
//! The `examples/` directory demonstrates each capability end to end.

pub mod area;
pub mod arith;
pub mod cli;
pub mod combinatorics;
pub mod engine;
pub mod oracle;
pub mod pixel;

pub use area::{accumulate, AreaSeries, CoeffStream};
pub use arith::DyadicRational;
pub use engine::{run, BatchPlan, BetaTable, Mode};
pub use oracle::ValidationReport;
pub use pixel::GridSpec;
