//! Command-line orchestration: coefficient runs, area export, the
//! validation suite, and the pixel comparator.
//!
//! The CLI itself is single-threaded; parallelism lives in the engine and
//! pixel modules.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::area::{accumulate, AreaError, CoeffStream};
use crate::arith::DyadicRational;
use crate::engine::{
    checkpoint_load, run_checkpointed, BatchPlan, BetaTable, CheckpointPolicy, Coefficient,
    EngineError, Mode,
};
use crate::oracle::{
    beta_valuation_check, closed_form_check, contour_check, float_error_audit, known_zero_check,
    roundtrip_check, structural_check, table3_spot_check, valuation_check, CheckRecord,
    OracleError, ValidationReport, TABLE3,
};
use crate::pixel::{self, GridSpec, PixelError};

/// Exact-mode column cap: dyadic numerators grow linearly in bit length, so
/// unbounded targets would silently take days. Override with
/// `--allow-large-exact`.
pub const EXACT_MODE_CAP: u64 = 4096;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Area(#[from] AreaError),
    #[error(transparent)]
    Pixel(#[from] PixelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("exact mode is capped at m_target {EXACT_MODE_CAP} (pass --allow-large-exact to override)")]
    ExactCap,
    #[error("bad coefficient CSV: {0}")]
    BadCsv(String),
    #[error("check {0:?} needs exact-mode coefficients")]
    CheckNeedsExact(CheckKind),
}

#[derive(Parser, Debug)]
#[command(name = "mset-area", version, about = "Area bounds for the Mandelbrot set from the Laurent coefficients of its exterior map")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the backward recursion and write the coefficient CSV.
    Compute(ComputeArgs),
    /// Accumulate area upper bounds A_N from a coefficient CSV.
    Area(AreaArgs),
    /// Run validation checks against a coefficient CSV or a fresh run.
    Validate(ValidateArgs),
    /// Escape-time pixel-counting estimate for comparison.
    Pixel(PixelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Float,
    Exact,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Float => Mode::Float,
            ModeArg::Exact => Mode::Exact,
        }
    }
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    /// Highest coefficient index to compute.
    #[arg(long)]
    pub m_target: u64,
    #[arg(long, value_enum, default_value = "float")]
    pub mode: ModeArg,
    /// Columns per parallel batch (at most 2^(threshold+1) - 1).
    #[arg(long, default_value_t = 4)]
    pub width: u64,
    /// Rows at or above this index run batch-parallel.
    #[arg(long, default_value_t = 2)]
    pub threshold: u32,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Checkpoint file; resumed from when it exists.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Columns between checkpoint saves.
    #[arg(long, default_value_t = 100_000)]
    pub checkpoint_interval: u64,
    /// Coefficient CSV output path.
    #[arg(long, default_value = "coefficients.csv")]
    pub out: PathBuf,
    #[arg(long, default_value_t = false)]
    pub allow_large_exact: bool,
}

#[derive(Args, Debug)]
pub struct AreaArgs {
    /// Coefficient CSV produced by `compute`.
    #[arg(long)]
    pub coefficients: PathBuf,
    /// Sample points N for A_N (comma separated); defaults to the last index.
    #[arg(long, value_delimiter = ',')]
    pub sample_points: Vec<u64>,
    /// Area CSV output path.
    #[arg(long, default_value = "area.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Coefficient CSV to validate; omitted means a fresh exact run.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    /// Target for the fresh run when no CSV is given.
    #[arg(long, default_value_t = 1023)]
    pub m_target: u64,
    /// Checks to run; defaults to everything the input mode supports.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Vec<CheckKind>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Report JSON output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    pub allow_large_exact: bool,
}

#[derive(Args, Debug)]
pub struct PixelArgs {
    /// Rectangle as re_min,re_max,im_min,im_max.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [-2.0, 0.5, 0.0, 1.25])]
    pub bounds: Vec<f64>,
    /// Cells per axis.
    #[arg(long, default_value_t = 1024)]
    pub resolution: u32,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: u64,
    /// Estimate JSON output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Zeros,
    ClosedForms,
    Valuations,
    BetaValuations,
    Structural,
    Roundtrip,
    Contour,
    FloatAudit,
    Table3,
}

impl CheckKind {
    fn needs_exact(self) -> bool {
        matches!(
            self,
            CheckKind::ClosedForms
                | CheckKind::Valuations
                | CheckKind::BetaValuations
                | CheckKind::Structural
                | CheckKind::Contour
        )
    }

    fn default_set(mode: Mode) -> Vec<CheckKind> {
        match mode {
            Mode::Exact => vec![
                CheckKind::Zeros,
                CheckKind::ClosedForms,
                CheckKind::Valuations,
                CheckKind::BetaValuations,
                CheckKind::Structural,
                CheckKind::Roundtrip,
                CheckKind::Contour,
                CheckKind::FloatAudit,
                CheckKind::Table3,
            ],
            Mode::Float => vec![
                CheckKind::Zeros,
                CheckKind::Roundtrip,
                CheckKind::FloatAudit,
                CheckKind::Table3,
            ],
        }
    }
}

/// Writes the "m,b_m" coefficient CSV (float: 17 significant digits; exact:
/// `numerator/2^exponent`).
pub fn write_coefficients_csv<C: Coefficient>(path: &Path, coeffs: &[C]) -> Result<(), CliError> {
    let mut text = String::from("m,b_m\n");
    for (m, c) in coeffs.iter().enumerate() {
        writeln!(text, "{m},{}", c.render()).expect("string write");
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a coefficient CSV back, inferring the mode from the value syntax.
pub fn read_coefficients_csv(path: &Path) -> Result<CoeffStream, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("m,b_m") => {}
        _ => return Err(CliError::BadCsv("missing 'm,b_m' header".into())),
    }
    let mut floats = Vec::new();
    let mut exacts = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (m, value) = line
            .split_once(',')
            .ok_or_else(|| CliError::BadCsv(format!("row {i} has no comma")))?;
        if m.trim().parse::<u64>() != Ok(i as u64) {
            return Err(CliError::BadCsv(format!("row {i} has index {m}")));
        }
        if value.contains("/2^") {
            let v = DyadicRational::parse(value)
                .ok_or_else(|| CliError::BadCsv(format!("row {i}: bad exact value {value}")))?;
            exacts.push(v);
        } else {
            let v = f64::parse(value)
                .ok_or_else(|| CliError::BadCsv(format!("row {i}: bad float value {value}")))?;
            floats.push(v);
        }
    }
    match (floats.is_empty(), exacts.is_empty()) {
        (false, true) => Ok(CoeffStream::Float(floats)),
        (true, false) => Ok(CoeffStream::Exact(exacts)),
        (true, true) => Err(CliError::BadCsv("no data rows".into())),
        (false, false) => Err(CliError::BadCsv("mixed float and exact values".into())),
    }
}

fn check_exact_cap(mode: Mode, m_target: u64, allow: bool) -> Result<(), CliError> {
    if mode == Mode::Exact && m_target > EXACT_MODE_CAP && !allow {
        return Err(CliError::ExactCap);
    }
    Ok(())
}

fn compute_table<C: Coefficient>(args: &ComputeArgs) -> Result<BetaTable<C>, CliError> {
    let plan = BatchPlan::new(args.width, args.threshold)?;
    let mut table = match &args.checkpoint {
        Some(path) if path.exists() => checkpoint_load::<C>(path)?,
        _ => BetaTable::new(),
    };
    let policy = args.checkpoint.as_ref().map(|path| CheckpointPolicy {
        path: path.clone(),
        interval: args.checkpoint_interval,
    });
    run_checkpointed(&mut table, args.m_target, &plan, args.workers, policy.as_ref())?;
    Ok(table)
}

pub fn cmd_compute(args: &ComputeArgs) -> Result<(), CliError> {
    check_exact_cap(args.mode.into(), args.m_target, args.allow_large_exact)?;
    match args.mode {
        ModeArg::Float => {
            let table = compute_table::<f64>(args)?;
            write_coefficients_csv(&args.out, table.coefficients())
        }
        ModeArg::Exact => {
            let table = compute_table::<DyadicRational>(args)?;
            write_coefficients_csv(&args.out, table.coefficients())
        }
    }
}

pub fn cmd_area(args: &AreaArgs) -> Result<serde_json::Value, CliError> {
    let stream = read_coefficients_csv(&args.coefficients)?;
    let points = if args.sample_points.is_empty() {
        vec![stream.len().saturating_sub(1)]
    } else {
        args.sample_points.clone()
    };
    let series = accumulate(&stream, &points)?;
    series.export_csv(&args.out)?;
    let last = points.iter().copied().max().unwrap_or(0);
    let tail_from = last / 2 + 1;
    let max_tail = (tail_from..=last)
        .map(|m| stream.b_approx(m).abs())
        .fold(0.0f64, f64::max);
    Ok(series.summary(max_tail)?)
}

fn fresh_exact_table(m_target: u64, workers: usize) -> Result<BetaTable<DyadicRational>, CliError> {
    let mut table = BetaTable::new();
    run_checkpointed(
        &mut table,
        m_target,
        &BatchPlan::new(4, 2).expect("static plan"),
        workers,
        None,
    )?;
    Ok(table)
}

fn fresh_float_table(m_target: u64, workers: usize) -> Result<BetaTable<f64>, CliError> {
    let mut table = BetaTable::new();
    run_checkpointed(
        &mut table,
        m_target,
        &BatchPlan::new(4, 2).expect("static plan"),
        workers,
        None,
    )?;
    Ok(table)
}

fn skipped(kind: CheckKind, why: &str) -> CheckRecord {
    let mut rec = CheckRecord::new(&format!("{kind:?}"), "skipped".into());
    rec.notes.push(why.to_string());
    rec
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<ValidationReport, CliError> {
    let stream = match &args.coefficients {
        Some(path) => read_coefficients_csv(path)?,
        None => {
            check_exact_cap(Mode::Exact, args.m_target, args.allow_large_exact)?;
            let table = fresh_exact_table(args.m_target, args.workers)?;
            CoeffStream::Exact(table.coefficients().to_vec())
        }
    };
    let mode = stream.mode();
    let limit = stream.len().saturating_sub(1);
    let checks = if args.checks.is_empty() {
        CheckKind::default_set(mode)
    } else {
        for &c in &args.checks {
            if c.needs_exact() && mode == Mode::Float {
                return Err(CliError::CheckNeedsExact(c));
            }
        }
        args.checks.clone()
    };

    // table-backed checks recompute the table at the stream's length
    let needs_exact_table = checks.iter().any(|c| {
        matches!(
            c,
            CheckKind::BetaValuations | CheckKind::Structural | CheckKind::FloatAudit
        ) || (mode == Mode::Exact && *c == CheckKind::Roundtrip)
    });
    let exact_table = if needs_exact_table && mode == Mode::Exact {
        check_exact_cap(Mode::Exact, limit, args.allow_large_exact)?;
        Some(fresh_exact_table(limit, args.workers)?)
    } else {
        None
    };

    let mut report = ValidationReport::new();
    for kind in checks {
        let record = match kind {
            CheckKind::Zeros => known_zero_check(&stream, limit)?,
            CheckKind::ClosedForms => match &stream {
                CoeffStream::Exact(b) => closed_form_check(b, limit),
                CoeffStream::Float(_) => return Err(CliError::CheckNeedsExact(kind)),
            },
            CheckKind::Valuations => match &stream {
                CoeffStream::Exact(b) => valuation_check(b, limit)?,
                CoeffStream::Float(_) => return Err(CliError::CheckNeedsExact(kind)),
            },
            CheckKind::BetaValuations => {
                beta_valuation_check(exact_table.as_ref().expect("exact table"))
            }
            CheckKind::Structural => structural_check(exact_table.as_ref().expect("exact table")),
            CheckKind::Roundtrip => match mode {
                Mode::Exact => roundtrip_check(exact_table.as_ref().expect("exact table")),
                Mode::Float => roundtrip_check(&fresh_float_table(limit, args.workers)?),
            },
            CheckKind::Contour => match &stream {
                CoeffStream::Exact(b) => contour_check(b, 4, limit.min(29)),
                CoeffStream::Float(_) => return Err(CliError::CheckNeedsExact(kind)),
            },
            CheckKind::FloatAudit => {
                let audit_limit = limit.min(1024).min(EXACT_MODE_CAP);
                if audit_limit == 0 {
                    skipped(kind, "stream too short for the audit")
                } else {
                    let ft = fresh_float_table(audit_limit, args.workers)?;
                    let et = match (&stream, &exact_table) {
                        (_, Some(t)) => t.clone(),
                        (CoeffStream::Exact(_), None) => {
                            fresh_exact_table(audit_limit, args.workers)?
                        }
                        (CoeffStream::Float(_), None) => {
                            fresh_exact_table(audit_limit, args.workers)?
                        }
                    };
                    float_error_audit(&ft, &et, audit_limit, 1e-13)
                }
            }
            CheckKind::Table3 => {
                let reached: Vec<(u64, f64)> = TABLE3
                    .iter()
                    .copied()
                    .filter(|&(m, _)| m <= limit)
                    .collect();
                table3_spot_check(&stream, &reached)?
            }
        };
        report.push(record);
    }
    Ok(report)
}

pub fn cmd_pixel(args: &PixelArgs) -> Result<serde_json::Value, CliError> {
    let spec = GridSpec::new(
        (args.bounds[0], args.bounds[1], args.bounds[2], args.bounds[3]),
        args.resolution,
        args.resolution,
        args.max_iter,
        2.0,
    )?;
    let estimate = pixel::estimate_area(&spec);
    Ok(pixel::summary(&spec, estimate))
}

fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Dispatches a parsed configuration. Returns the process exit code:
/// 0 success, 1 validation failure, 2 error.
pub fn dispatch(config: &RunConfig) -> i32 {
    let result: Result<i32, CliError> = match &config.command {
        Command::Compute(args) => cmd_compute(args).map(|()| 0),
        Command::Area(args) => cmd_area(args)
            .and_then(|summary| emit_json(&summary, None).map(|()| 0)),
        Command::Validate(args) => cmd_validate(args).and_then(|report| {
            emit_json(&report.to_json(), args.out.as_deref())?;
            Ok(if report.passed { 0 } else { 1 })
        }),
        Command::Pixel(args) => cmd_pixel(args)
            .and_then(|summary| emit_json(&summary, args.out.as_deref()).map(|()| 0)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
