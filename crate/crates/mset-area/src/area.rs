//! Area upper bounds `A_N = pi * (1 - sum_{m=1}^{N} m * b_m^2)` accumulated
//! from the coefficient stream.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::arith::DyadicRational;
use crate::engine::Mode;

#[derive(Debug, Error)]
pub enum AreaError {
    #[error("stream has {have} coefficients but sample point N={want} was requested")]
    StreamTooShort { have: u64, want: u64 },
    #[error("empty area series")]
    EmptySeries,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Ordered coefficients `b_0, b_1, ...` with their arithmetic mode.
#[derive(Debug, Clone)]
pub enum CoeffStream {
    Float(Vec<f64>),
    Exact(Vec<DyadicRational>),
}

impl CoeffStream {
    pub fn mode(&self) -> Mode {
        match self {
            CoeffStream::Float(_) => Mode::Float,
            CoeffStream::Exact(_) => Mode::Exact,
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            CoeffStream::Float(v) => v.len() as u64,
            CoeffStream::Exact(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn b_approx(&self, m: u64) -> f64 {
        match self {
            CoeffStream::Float(v) => v[m as usize],
            CoeffStream::Exact(v) => v[m as usize].to_f64().expect("coefficient out of range"),
        }
    }
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.err;
        let t = self.sum + y;
        self.err = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AreaSample {
    pub n: u64,
    pub area: f64,
}

/// `(N, A_N)` samples, non-increasing in `N` and bounded by pi.
#[derive(Debug, Clone)]
pub struct AreaSeries {
    mode: Mode,
    samples: Vec<AreaSample>,
}

impl AreaSeries {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn samples(&self) -> &[AreaSample] {
        &self.samples
    }

    /// CSV rows `N,A_N` with 10 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), AreaError> {
        if self.samples.is_empty() {
            return Err(AreaError::EmptySeries);
        }
        writeln!(out, "N,A_N")?;
        for s in &self.samples {
            writeln!(out, "{},{:.9e}", s.n, s.area)?;
        }
        Ok(())
    }

    pub fn export_csv(&self, path: &Path) -> Result<(), AreaError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    /// JSON summary of the final sample.
    pub fn summary(&self, max_abs_bm_tail: f64) -> Result<serde_json::Value, AreaError> {
        let last = self.samples.last().ok_or(AreaError::EmptySeries)?;
        Ok(serde_json::json!({
            "mode": self.mode,
            "N": last.n,
            "area_upper_bound": last.area,
            "max_abs_bm_tail": max_abs_bm_tail,
        }))
    }
}

fn check_points(points: &[u64], have: u64) -> Result<Vec<u64>, AreaError> {
    let mut pts: Vec<u64> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if let Some(&want) = pts.iter().find(|&&n| n >= have) {
        // A_N needs b_1..b_N, i.e. stream length at least N+1
        return Err(AreaError::StreamTooShort { have, want });
    }
    Ok(pts)
}

/// Accumulates `A_N` at the requested sample points.
///
/// Float streams use compensated summation; exact streams fold the partial
/// sum in dyadic arithmetic and convert once per sample point, so the only
/// rounding is the final multiply by pi.
pub fn accumulate(stream: &CoeffStream, sample_points: &[u64]) -> Result<AreaSeries, AreaError> {
    let pts = check_points(sample_points, stream.len())?;
    let samples = match stream {
        CoeffStream::Float(b) => {
            let mut acc = CompensatedSum::default();
            let mut out = Vec::with_capacity(pts.len());
            let mut next = pts.iter().peekable();
            for m in 0..=pts.last().copied().unwrap_or(0) {
                if m >= 1 {
                    acc.add(m as f64 * b[m as usize] * b[m as usize]);
                }
                while next.peek() == Some(&&m) {
                    out.push(AreaSample {
                        n: m,
                        area: std::f64::consts::PI * (1.0 - acc.value()),
                    });
                    next.next();
                }
            }
            out
        }
        CoeffStream::Exact(b) => {
            let mut acc = DyadicRational::zero();
            let mut out = Vec::with_capacity(pts.len());
            let mut next = pts.iter().peekable();
            for m in 0..=pts.last().copied().unwrap_or(0) {
                if m >= 1 {
                    let sq = b[m as usize].square();
                    let term = sq.mul(&DyadicRational::from_integer(m as i64));
                    acc = acc.add(&term);
                }
                while next.peek() == Some(&&m) {
                    let partial = DyadicRational::one().sub(&acc);
                    out.push(AreaSample {
                        n: m,
                        area: std::f64::consts::PI
                            * partial.to_f64().expect("partial sum out of f64 range"),
                    });
                    next.next();
                }
            }
            out
        }
    };
    Ok(AreaSeries {
        mode: stream.mode(),
        samples,
    })
}
