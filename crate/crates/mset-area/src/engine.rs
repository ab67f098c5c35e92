//! Backward recursion for the coefficient table `beta_{n,m}` with a
//! column-batch parallel schedule, in either 64-bit float or exact dyadic
//! arithmetic.
//!
//! The table is filled column by column, moving up each column from its
//! deepest nontrivial row to row 0. Within a batch of `w` consecutive
//! columns, row `n` of all `w` columns is independent as long as
//! `w <= 2^{n+1} - 1`: the deepest same-row dependency of column `m0 + j`
//! is column `m0 + j - 2^{n+1} + 1`, which lies before the batch when
//! `j <= 2^{n+1} - 2`. Rows at or above the plan's `row_threshold` are
//! therefore computed one row-level at a time with the batch columns in
//! parallel; the rows below the threshold are finished column by column,
//! left to right.

use std::path::Path;

use crate::arith::DyadicRational;
use crate::combinatorics::p_bound;
use num_bigint::{BigInt, Sign};
use thiserror::Error;

pub mod checkpoint;

/// Arithmetic mode of a table or coefficient stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Exact,
}

impl Mode {
    pub fn as_byte(self) -> u8 {
        match self {
            Mode::Float => 0,
            Mode::Exact => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("beta_({n},{m}) required but not yet computed")]
    MissingDependency { n: u32, m: u64 },
    #[error("invalid batch plan: width {width} exceeds 2^{}-1 for row threshold {row_threshold}", row_threshold + 1)]
    InvalidPlan { width: u64, row_threshold: u32 },
    #[error("exact-arithmetic certificate violated at beta_({n},{m}): valuation exceeds p(n,m)={bound}")]
    Certificate { n: u32, m: u64, bound: i64 },
    #[error("band identity verification failed at beta_({n},{m})")]
    BandMismatch { n: u32, m: u64 },
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] checkpoint::CheckpointError),
}

/// Scalar type the recursion runs over. Implemented by `f64` (float mode)
/// and [`DyadicRational`] (exact mode).
pub trait Coefficient: Clone + PartialEq + Send + Sync + std::fmt::Debug + 'static {
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn halve(&self) -> Self;
    fn double(&self) -> Self;
    fn to_f64(&self) -> f64;

    /// Integrality-certificate hook: in exact mode, checks that the negated
    /// 2-adic valuation does not exceed `bound`. Unconditional in float mode.
    fn neg_valuation_within(&self, bound: i64) -> bool;

    /// Lossless textual form for the coefficient CSV.
    fn render(&self) -> String;
    fn parse(s: &str) -> Option<Self>;

    fn write_bytes(&self, out: &mut Vec<u8>);
    fn read_bytes(input: &mut &[u8]) -> Option<Self>;
}

impl Coefficient for f64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline(always)]
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    #[inline(always)]
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    #[inline(always)]
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn halve(&self) -> Self {
        0.5 * self
    }
    fn double(&self) -> Self {
        2.0 * self
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn neg_valuation_within(&self, _bound: i64) -> bool {
        true
    }
    fn render(&self) -> String {
        // 17 significant digits: lossless round-trip for binary64
        format!("{self:.16e}")
    }
    fn parse(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_bytes(input: &mut &[u8]) -> Option<Self> {
        let (head, rest) = input.split_first_chunk::<8>()?;
        *input = rest;
        Some(f64::from_le_bytes(*head))
    }
}

impl Coefficient for DyadicRational {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        DyadicRational::zero()
    }
    fn one() -> Self {
        DyadicRational::one()
    }
    fn is_zero(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        DyadicRational::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        DyadicRational::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        DyadicRational::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        DyadicRational::neg(self)
    }
    fn halve(&self) -> Self {
        DyadicRational::halve(self)
    }
    fn double(&self) -> Self {
        DyadicRational::double(self)
    }
    fn to_f64(&self) -> f64 {
        DyadicRational::to_f64(self).expect("coefficient magnitude exceeds f64 range")
    }
    fn neg_valuation_within(&self, bound: i64) -> bool {
        self.is_zero() || self.exponent() <= bound
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn parse(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn write_bytes(&self, out: &mut Vec<u8>) {
        let (sign, mag) = self.numerator().clone().into_parts();
        out.push(match sign {
            Sign::Minus => 2,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        });
        let bytes = mag.to_bytes_le();
        out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&bytes);
        out.extend_from_slice(&self.exponent().to_le_bytes());
    }
    fn read_bytes(input: &mut &[u8]) -> Option<Self> {
        let (&sign, rest) = input.split_first()?;
        let (len, rest) = rest.split_first_chunk::<4>()?;
        let len = u32::from_le_bytes(*len) as usize;
        if rest.len() < len + 8 {
            return None;
        }
        let mag = num_bigint::BigUint::from_bytes_le(&rest[..len]);
        let sign = match sign {
            0 => Sign::NoSign,
            1 => Sign::Plus,
            2 => Sign::Minus,
            _ => return None,
        };
        let rest = &rest[len..];
        let (exp, rest) = rest.split_first_chunk::<8>()?;
        *input = rest;
        Some(DyadicRational::new(
            BigInt::from_biguint(sign, mag),
            i64::from_le_bytes(*exp),
        ))
    }
}

/// First nontrivial column of row `n`: `2^{n+1} - 1`.
pub fn row_start(n: u32) -> u64 {
    (1u64 << (n + 1)) - 1
}

/// Deepest nontrivial row of column `m >= 1`: `floor(log2(m+1)) - 1`.
pub fn deepest_row(m: u64) -> u32 {
    debug_assert!(m >= 1);
    (63 - (m + 1).leading_zeros()).saturating_sub(1)
}

/// Batch geometry for the column-parallel schedule.
///
/// `width` consecutive columns are processed together; rows at or above
/// `row_threshold` run in parallel across the batch. The independence bound
/// `width <= 2^{row_threshold + 1} - 1` is enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    width: u64,
    row_threshold: u32,
}

impl BatchPlan {
    pub fn new(width: u64, row_threshold: u32) -> Result<Self, EngineError> {
        if width == 0 || row_threshold >= 62 || width > (1u64 << (row_threshold + 1)) - 1 {
            return Err(EngineError::InvalidPlan {
                width,
                row_threshold,
            });
        }
        Ok(BatchPlan {
            width,
            row_threshold,
        })
    }

    /// Single-column schedule (no cross-column parallelism).
    pub fn sequential() -> Self {
        BatchPlan {
            width: 1,
            row_threshold: 0,
        }
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn row_threshold(&self) -> u32 {
        self.row_threshold
    }
}

/// Dense store of the nontrivial `beta_{n,m}`.
///
/// Row `n` holds one contiguous run starting at column `2^{n+1} - 1`.
/// The boundary value `beta_{n,0} = 1` and the trivial zeros
/// (`n >= 1`, `1 <= m <= 2^{n+1} - 2`) are answered by rule, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable<C: Coefficient> {
    rows: Vec<Vec<C>>,
    m_done: u64,
    verify_band: bool,
}

impl<C: Coefficient> Default for BetaTable<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Coefficient> BetaTable<C> {
    pub fn new() -> Self {
        BetaTable {
            rows: Vec::new(),
            m_done: 0,
            verify_band: false,
        }
    }

    /// When set, band-identity entries are recomputed through the full
    /// recursion and compared against the identity value.
    pub fn set_verify_band(&mut self, on: bool) {
        self.verify_band = on;
    }

    pub fn mode(&self) -> Mode {
        C::MODE
    }

    /// Highest fully computed column.
    pub fn m_done(&self) -> u64 {
        self.m_done
    }

    /// Highest stored row index, or `None` for an empty table.
    pub fn n_max(&self) -> Option<u32> {
        (!self.rows.is_empty()).then(|| self.rows.len() as u32 - 1)
    }

    /// Row `n` as a slice indexed from column `2^{n+1} - 1`.
    pub fn row(&self, n: u32) -> &[C] {
        self.rows.get(n as usize).map_or(&[], Vec::as_slice)
    }

    /// `beta_{n,m}`, answering boundary and trivial-zero values by rule.
    pub fn beta(&self, n: u32, m: u64) -> Result<C, EngineError> {
        if m == 0 {
            return Ok(C::one());
        }
        let start = row_start(n);
        if n >= 1 && m <= start - 1 {
            return Ok(C::zero());
        }
        self.rows
            .get(n as usize)
            .and_then(|row| row.get((m - start) as usize))
            .cloned()
            .ok_or(EngineError::MissingDependency { n, m })
    }

    /// Convolution term of the backward recursion, parity-split so each
    /// product is touched once. Empty range (`m < 2^{n+2} - 2`) is exactly 0.
    /// Summation runs over ascending `k`, a fixed order that makes float
    /// results independent of the schedule.
    pub fn convolution(&self, n: u32, m: u64) -> Result<C, EngineError> {
        let start = row_start(n);
        if m < 2 * start {
            // m < 2^{n+2} - 2
            return Ok(C::zero());
        }
        let row = self.rows.get(n as usize).filter(|r| {
            // entries through m - 2^{n+1} + 1 must be present
            r.len() as u64 >= m - start + 1 - start
        });
        let row = match row {
            Some(r) => r,
            None => return Err(EngineError::MissingDependency { n, m: m - start }),
        };
        let idx = |k: u64| (k - start) as usize;
        let mut acc = C::zero();
        let half = if m % 2 == 0 { m / 2 - 1 } else { (m - 1) / 2 };
        for k in start..=half {
            acc = acc.add(&row[idx(k)].mul(&row[idx(m - k)]));
        }
        acc = acc.double();
        if m % 2 == 0 {
            let mid = &row[idx(m / 2)];
            acc = acc.add(&mid.mul(mid));
        }
        Ok(acc)
    }

    /// One entry of the backward recursion:
    /// `beta_{n,m} = (beta_{n+1,m} - convolution - beta_{0,m-2^{n+1}+1}) / 2`.
    pub fn compute_entry(&self, n: u32, m: u64) -> Result<C, EngineError> {
        let start = row_start(n);
        debug_assert!(m >= start);
        if self.in_band(n, m) {
            let head = self.beta(0, m - start)?;
            let value = head.neg().halve();
            if self.verify_band {
                let recomputed = self.compute_entry_full(n, m)?;
                if recomputed != value {
                    return Err(EngineError::BandMismatch { n, m });
                }
            }
            return Ok(value);
        }
        self.compute_entry_full(n, m)
    }

    /// `2^{n+1} - 1 <= m <= 2^{n+2} - 3`: the band where the recursion
    /// collapses to `-beta_{0,m-2^{n+1}+1} / 2`.
    fn in_band(&self, n: u32, m: u64) -> bool {
        let start = row_start(n);
        m >= start && m <= 2 * start - 1
    }

    fn compute_entry_full(&self, n: u32, m: u64) -> Result<C, EngineError> {
        let up = self.beta(n + 1, m)?;
        let conv = self.convolution(n, m)?;
        let head = self.beta(0, m - row_start(n))?;
        Ok(up.sub(&conv).sub(&head).halve())
    }

    /// Appends `beta_{n,m}`, enforcing the dense-run layout and, in exact
    /// mode, the integrality certificate.
    fn push_entry(&mut self, n: u32, m: u64, value: C) -> Result<(), EngineError> {
        while self.rows.len() <= n as usize {
            self.rows.push(Vec::new());
        }
        let start = row_start(n);
        debug_assert_eq!(self.rows[n as usize].len() as u64, m - start);
        let bound = p_bound(n, m);
        if !value.neg_valuation_within(bound) {
            return Err(EngineError::Certificate { n, m, bound });
        }
        self.rows[n as usize].push(value);
        Ok(())
    }

    /// Fills column `m` from its deepest nontrivial row down to `row_floor`.
    pub fn compute_column(&mut self, m: u64, row_floor: u32) -> Result<(), EngineError> {
        let deepest = deepest_row(m);
        for n in (row_floor..=deepest).rev() {
            let v = self.compute_entry(n, m)?;
            self.push_entry(n, m, v)?;
        }
        Ok(())
    }

    /// The coefficient stream computed so far: `b_m = beta_{0,m+1}`.
    pub fn coefficients(&self) -> &[C] {
        self.row(0)
    }
}

/// Checkpoint policy for long runs: save every `interval` columns.
#[derive(Debug, Clone)]
pub struct CheckpointPolicy {
    pub path: std::path::PathBuf,
    pub interval: u64,
}

/// Extends the table through column `m_target` under the given batch plan.
///
/// The emitted values are identical for any worker count; in float mode they
/// are bit-identical across plans as well.
pub fn run<C: Coefficient>(
    table: &mut BetaTable<C>,
    m_target: u64,
    plan: &BatchPlan,
    workers: usize,
) -> Result<(), EngineError> {
    run_checkpointed(table, m_target, plan, workers, None)
}

/// [`run`] with optional periodic checkpointing at batch boundaries.
pub fn run_checkpointed<C: Coefficient>(
    table: &mut BetaTable<C>,
    m_target: u64,
    plan: &BatchPlan,
    workers: usize,
    policy: Option<&CheckpointPolicy>,
) -> Result<(), EngineError> {
    let pool = (workers > 1)
        .then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("failed to build worker pool")
        })
        .map(std::sync::Arc::new);
    let mut last_saved = table.m_done();
    while table.m_done() < m_target {
        let m0 = table.m_done() + 1;
        let last = (m0 + plan.width() - 1).min(m_target);
        compute_batch(table, m0, last, plan.row_threshold(), pool.as_deref())?;
        table.m_done = last;
        if let Some(policy) = policy {
            if table.m_done() - last_saved >= policy.interval || table.m_done() == m_target {
                checkpoint::save(table, &policy.path)?;
                last_saved = table.m_done();
            }
        }
    }
    Ok(())
}

fn compute_batch<C: Coefficient>(
    table: &mut BetaTable<C>,
    m0: u64,
    last: u64,
    row_threshold: u32,
    pool: Option<&rayon::ThreadPool>,
) -> Result<(), EngineError> {
    use rayon::prelude::*;

    // Rows >= row_threshold: one row-level at a time, batch columns together.
    let deepest = deepest_row(last);
    for n in (row_threshold..=deepest).rev() {
        let first = m0.max(row_start(n));
        if first > last {
            continue;
        }
        let cols: Vec<u64> = (first..=last).collect();
        let values: Vec<C> = match pool {
            Some(pool) => pool.install(|| {
                cols.par_iter()
                    .map(|&m| table.compute_entry(n, m))
                    .collect::<Result<_, _>>()
            })?,
            None => cols
                .iter()
                .map(|&m| table.compute_entry(n, m))
                .collect::<Result<_, _>>()?,
        };
        for (&m, v) in cols.iter().zip(values) {
            table.push_entry(n, m, v)?;
        }
    }

    // Rows below the threshold: column by column, left to right. With a
    // zero threshold every row was already handled above.
    if row_threshold > 0 {
        for m in m0..=last {
            let floor_top = deepest_row(m).min(row_threshold - 1);
            for n in (0..=floor_top).rev() {
                let v = table.compute_entry(n, m)?;
                table.push_entry(n, m, v)?;
            }
        }
    }
    Ok(())
}

/// Saves the table to `path` (delegates to the checkpoint codec).
pub fn checkpoint_save<C: Coefficient>(
    table: &BetaTable<C>,
    path: &Path,
) -> Result<(), EngineError> {
    checkpoint::save(table, path).map_err(Into::into)
}

/// Loads a table previously saved with [`checkpoint_save`]. The stored mode
/// must match `C`.
pub fn checkpoint_load<C: Coefficient>(path: &Path) -> Result<BetaTable<C>, EngineError> {
    checkpoint::load(path).map_err(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i64, e: i64) -> DyadicRational {
        DyadicRational::new(n.into(), e)
    }

    fn exact_to(m_target: u64) -> BetaTable<DyadicRational> {
        let mut t = BetaTable::new();
        run(&mut t, m_target, &BatchPlan::sequential(), 1).unwrap();
        t
    }

    #[test]
    fn geometry() {
        assert_eq!(row_start(0), 1);
        assert_eq!(row_start(1), 3);
        assert_eq!(row_start(2), 7);
        assert_eq!(deepest_row(1), 0);
        assert_eq!(deepest_row(2), 0);
        assert_eq!(deepest_row(3), 1);
        assert_eq!(deepest_row(7), 2);
        assert_eq!(deepest_row(8), 2);
    }

    #[test]
    fn convolution_worked_examples() {
        let t = exact_to(9);
        // n=1, m=7: single pairing 2 * beta_{1,3} beta_{1,4}
        let b13 = t.beta(1, 3).unwrap();
        let b14 = t.beta(1, 4).unwrap();
        assert_eq!(t.convolution(1, 7).unwrap(), b13.mul(&b14).double());
        // n=1, m=8: 2 beta_{1,3} beta_{1,5} + beta_{1,4}^2
        let b15 = t.beta(1, 5).unwrap();
        assert_eq!(
            t.convolution(1, 8).unwrap(),
            b13.mul(&b15).double().add(&b14.square())
        );
        // n=1, m=6: middle-square-only case, (beta_{1,3})^2 = 1/4
        assert_eq!(t.convolution(1, 6).unwrap(), d(1, 2));
        // empty range contributes exactly zero
        assert!(t.convolution(1, 5).unwrap().is_zero());
    }

    #[test]
    fn entry_worked_examples() {
        let t = exact_to(70);
        assert_eq!(t.beta(0, 1).unwrap(), d(-1, 1));
        assert_eq!(t.beta(0, 4).unwrap(), d(15, 7));
        for n in 1..=3u32 {
            assert_eq!(t.beta(n, 1u64 << (n + 2)).unwrap(), d(1, 4), "n={n}");
        }
        for n in 0..=4u32 {
            assert_eq!(t.beta(n, row_start(n)).unwrap(), d(-1, 1), "n={n}");
        }
        // worked column-7/8 values from the sequential prototype
        assert_eq!(t.beta(1, 7).unwrap(), d(-47, 8));
        assert_eq!(t.beta(1, 8).unwrap(), d(1, 4));
    }

    #[test]
    fn compute_column_order_and_ranges() {
        let mut t = BetaTable::<DyadicRational>::new();
        t.compute_column(1, 0).unwrap();
        assert_eq!(t.coefficients(), &[d(-1, 1)]);
        t.m_done = 1;
        t.compute_column(2, 0).unwrap();
        t.m_done = 2;
        t.compute_column(3, 0).unwrap();
        assert_eq!(t.beta(1, 3).unwrap(), d(-1, 1));
        assert_eq!(t.beta(0, 3).unwrap(), d(-1, 2));
        t.m_done = 3;
        // partial column: fill rows >= 1 only, row 0 left pending
        for m in 4..=7 {
            t.compute_column(m, 0).unwrap();
            t.m_done = m;
        }
        t.compute_column(8, 1).unwrap();
        assert!(t.beta(2, 8).is_ok());
        assert!(t.beta(1, 8).is_ok());
        assert!(matches!(
            t.beta(0, 8),
            Err(EngineError::MissingDependency { n: 0, m: 8 })
        ));
    }

    #[test]
    fn run_emits_known_stream() {
        let mut t = BetaTable::<DyadicRational>::new();
        run(&mut t, 9, &BatchPlan::new(4, 2).unwrap(), 1).unwrap();
        let expected = [
            d(-1, 1),
            d(1, 3),
            d(-1, 2),
            d(15, 7),
            d(0, 0),
            d(-47, 10),
            d(-1, 4),
            d(987, 15),
            d(0, 0),
        ];
        assert_eq!(t.coefficients(), &expected);
    }

    #[test]
    fn run_empty_target() {
        let mut t = BetaTable::<f64>::new();
        run(&mut t, 0, &BatchPlan::sequential(), 1).unwrap();
        assert!(t.coefficients().is_empty());
    }

    #[test]
    fn invalid_plan_rejected() {
        assert!(matches!(
            BatchPlan::new(8, 2),
            Err(EngineError::InvalidPlan { .. })
        ));
        assert!(BatchPlan::new(7, 2).is_ok());
        assert!(BatchPlan::new(0, 2).is_err());
    }

    #[test]
    fn worker_count_and_width_do_not_change_values() {
        let mut reference = BetaTable::<f64>::new();
        run(&mut reference, 500, &BatchPlan::sequential(), 1).unwrap();
        for (width, threshold, workers) in [(3, 1, 2), (4, 2, 4), (7, 2, 3)] {
            let mut t = BetaTable::<f64>::new();
            run(&mut t, 500, &BatchPlan::new(width, threshold).unwrap(), workers).unwrap();
            assert_eq!(t.coefficients(), reference.coefficients());
            for n in 0..reference.rows.len() {
                assert_eq!(t.rows[n], reference.rows[n], "row {n}");
            }
        }
    }

    #[test]
    fn band_verification_switch() {
        let mut t = BetaTable::<DyadicRational>::new();
        t.set_verify_band(true);
        run(&mut t, 256, &BatchPlan::new(4, 2).unwrap(), 1).unwrap();
        let plain = exact_to(256);
        assert_eq!(t.coefficients(), plain.coefficients());
    }
}
