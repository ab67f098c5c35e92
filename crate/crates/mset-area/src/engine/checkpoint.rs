//! Binary checkpoint format for interrupted runs.
//!
//! Layout: magic `MSB1`, format version (u32 LE), mode byte, `m_done`
//! (u64 LE), row count (u32 LE), per-row lengths (u64 LE each), the row
//! values in order (float mode: IEEE binary64 LE; exact mode:
//! length-prefixed sign-magnitude numerator bytes plus a 64-bit exponent),
//! and a trailing 64-bit FNV-1a checksum over everything before it.
//! Float-mode round-trips are bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use super::{row_start, BetaTable, Coefficient};

pub const MAGIC: &[u8; 4] = b"MSB1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint format version {0}")]
    VersionMismatch(u32),
    #[error("checkpoint mode does not match the requested arithmetic mode")]
    ModeMismatch,
    #[error("corrupt checkpoint file: {0}")]
    Corrupt(&'static str),
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn to_bytes<C: Coefficient>(table: &BetaTable<C>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(C::MODE.as_byte());
    out.extend_from_slice(&table.m_done().to_le_bytes());
    let rows = table.n_max().map_or(0, |n| n + 1);
    out.extend_from_slice(&rows.to_le_bytes());
    for n in 0..rows {
        out.extend_from_slice(&(table.row(n).len() as u64).to_le_bytes());
    }
    for n in 0..rows {
        for v in table.row(n) {
            v.write_bytes(&mut out);
        }
    }
    let digest = fnv1a(&out);
    out.extend_from_slice(&digest.to_le_bytes());
    out
}

pub fn from_bytes<C: Coefficient>(bytes: &[u8]) -> Result<BetaTable<C>, CheckpointError> {
    if bytes.len() < 4 + 4 + 1 + 8 + 4 + 8 {
        return Err(CheckpointError::Corrupt("file too short"));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(digest.try_into().unwrap());
    if fnv1a(body) != stored {
        return Err(CheckpointError::Corrupt("checksum mismatch"));
    }
    let (magic, rest) = body.split_at(4);
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let (ver, rest) = rest.split_at(4);
    let version = u32::from_le_bytes(ver.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(CheckpointError::VersionMismatch(version));
    }
    let (&mode, rest) = rest.split_first().unwrap();
    if mode != C::MODE.as_byte() {
        return Err(CheckpointError::ModeMismatch);
    }
    let (m_done, rest) = rest.split_at(8);
    let m_done = u64::from_le_bytes(m_done.try_into().unwrap());
    let (row_count, mut rest) = rest.split_at(4);
    let row_count = u32::from_le_bytes(row_count.try_into().unwrap());
    let mut lengths = Vec::with_capacity(row_count as usize);
    for _ in 0..row_count {
        if rest.len() < 8 {
            return Err(CheckpointError::Corrupt("truncated row lengths"));
        }
        let (len, tail) = rest.split_at(8);
        lengths.push(u64::from_le_bytes(len.try_into().unwrap()));
        rest = tail;
    }
    let mut rows = Vec::with_capacity(row_count as usize);
    for (n, &len) in lengths.iter().enumerate() {
        let expected = (m_done + 1).saturating_sub(row_start(n as u32));
        if len != expected {
            return Err(CheckpointError::Corrupt("row length inconsistent with m_done"));
        }
        let mut row = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let v = C::read_bytes(&mut rest)
                .ok_or(CheckpointError::Corrupt("truncated value data"))?;
            row.push(v);
        }
        rows.push(row);
    }
    if !rest.is_empty() {
        return Err(CheckpointError::Corrupt("trailing data"));
    }
    Ok(BetaTable {
        rows,
        m_done,
        verify_band: false,
    })
}

pub fn save<C: Coefficient>(table: &BetaTable<C>, path: &Path) -> Result<(), CheckpointError> {
    let bytes = to_bytes(table);
    // write-then-rename so an interrupted save never clobbers a good file
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load<C: Coefficient>(path: &Path) -> Result<BetaTable<C>, CheckpointError> {
    let bytes = fs::read(path)?;
    from_bytes(&bytes)
}
