//! Escape-time pixel counting: the classical grid estimate the series
//! bound is compared against.
//!
//! A pixel counts iff its cell center does not escape within the iteration
//! budget. The default grid samples the upper half of the set and the count
//! is doubled for mirror symmetry about the real axis.

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PixelError {
    #[error("escape radius {0} is below 2; escape would no longer be exact")]
    RadiusTooSmall(f64),
    #[error("grid resolution must be positive on both axes")]
    EmptyGrid,
    #[error("rectangle bounds are empty or not finite")]
    BadBounds,
}

/// Sampling rectangle, per-axis resolution, iteration budget, and escape
/// radius (at least 2, so escape is an exact criterion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: u32,
    pub ny: u32,
    pub max_iter: u64,
    pub escape_radius: f64,
}

impl GridSpec {
    pub fn new(
        bounds: (f64, f64, f64, f64),
        nx: u32,
        ny: u32,
        max_iter: u64,
        escape_radius: f64,
    ) -> Result<Self, PixelError> {
        let (re_min, re_max, im_min, im_max) = bounds;
        if escape_radius < 2.0 {
            return Err(PixelError::RadiusTooSmall(escape_radius));
        }
        if nx == 0 || ny == 0 {
            return Err(PixelError::EmptyGrid);
        }
        if !(re_min < re_max && im_min < im_max)
            || !bounds.0.is_finite()
            || !re_max.is_finite()
            || !im_min.is_finite()
            || !im_max.is_finite()
        {
            return Err(PixelError::BadBounds);
        }
        Ok(GridSpec {
            re_min,
            re_max,
            im_min,
            im_max,
            nx,
            ny,
            max_iter,
            escape_radius,
        })
    }

    /// Upper-half rectangle covering the set: `[-2, 0.5] x [0, 1.25]`.
    pub fn half_plane(resolution: u32, max_iter: u64) -> Result<Self, PixelError> {
        GridSpec::new((-2.0, 0.5, 0.0, 1.25), resolution, resolution, max_iter, 2.0)
    }

    pub fn cell_area(&self) -> f64 {
        let dx = (self.re_max - self.re_min) / self.nx as f64;
        let dy = (self.im_max - self.im_min) / self.ny as f64;
        dx * dy
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::half_plane(1024, 1000).unwrap()
    }
}

/// Whether the orbit of 0 under `z -> z^2 + c` leaves `|z| > radius`
/// within `max_iter` steps.
///
/// Two shortcuts preserve the exact answer whenever `radius >= 2`: the
/// main-cardioid and period-2-disk membership tests (interior points never
/// leave `|z| <= 2`), and exact floating-point cycle detection (a repeated
/// state can never escape later).
pub fn escapes(c: (f64, f64), max_iter: u64, radius: f64) -> bool {
    let (cr, ci) = c;
    if radius >= 2.0 {
        let xq = cr - 0.25;
        let q = xq * xq + ci * ci;
        if q * (q + xq) < 0.25 * ci * ci {
            return false;
        }
        let xb = cr + 1.0;
        if xb * xb + ci * ci < 0.0625 {
            return false;
        }
    }
    let r2 = radius * radius;
    let (mut zr, mut zi) = (0.0f64, 0.0f64);
    let (mut sr, mut si) = (zr, zi);
    let mut gap = 1u64;
    let mut since = 0u64;
    for _ in 0..max_iter {
        let nr = zr * zr - zi * zi + cr;
        let ni = 2.0 * zr * zi + ci;
        zr = nr;
        zi = ni;
        if zr * zr + zi * zi > r2 {
            return true;
        }
        if zr == sr && zi == si {
            return false;
        }
        since += 1;
        if since == gap {
            sr = zr;
            si = zi;
            gap <<= 1;
            since = 0;
        }
    }
    false
}

/// Number of grid cells whose center does not escape. Parallel over rows;
/// the reduction is an integer sum, so the result is order-independent.
pub fn non_escaping_count(spec: &GridSpec) -> u64 {
    let dx = (spec.re_max - spec.re_min) / spec.nx as f64;
    let dy = (spec.im_max - spec.im_min) / spec.ny as f64;
    (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            let ci = spec.im_min + (j as f64 + 0.5) * dy;
            let mut row = 0u64;
            for i in 0..spec.nx {
                let cr = spec.re_min + (i as f64 + 0.5) * dx;
                if !escapes((cr, ci), spec.max_iter, spec.escape_radius) {
                    row += 1;
                }
            }
            row
        })
        .sum()
}

/// Area estimate: non-escaping cell count times cell area, doubled for the
/// mirror symmetry of the set about the real axis.
pub fn estimate_area(spec: &GridSpec) -> f64 {
    2.0 * non_escaping_count(spec) as f64 * spec.cell_area()
}

/// JSON summary of a pixel run.
pub fn summary(spec: &GridSpec, estimate: f64) -> serde_json::Value {
    serde_json::json!({
        "resolution": [spec.nx, spec.ny],
        "max_iter": spec.max_iter,
        "estimate": estimate,
    })
}
