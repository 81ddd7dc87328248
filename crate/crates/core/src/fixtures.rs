//! Readers for the high-precision reference tables in `fixtures/`.
//!
//! Each file is whitespace-separated columns; lines starting with `#` are
//! comments. The directory can be overridden with `FOCKLAB_FIXTURES`.

use std::fs;
use std::path::PathBuf;

use crate::error::{Error, Result};

pub fn fixture_dir() -> PathBuf {
    std::env::var_os("FOCKLAB_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

/// Parses rows of `width` floats from a fixture file.
pub fn read_table(name: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let path = fixture_dir().join(name);
    let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let row = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Config(format!("{name}: {t}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != width {
                return Err(Error::Config(format!("{name}: expected {width} columns, got {}", row.len())));
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGammaRow {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLefflerRow {
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub value: f64,
}

/// `R_0(r) - ΔQ_0(r)` for `Q_0 = a|z|^{2k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R0ExcessRow {
    pub k: u32,
    pub c: f64,
    pub a: f64,
    pub r: f64,
    pub excess: f64,
}

pub fn log_gamma_table() -> Result<Vec<LogGammaRow>> {
    Ok(read_table("log_gamma.txt", 2)?
        .into_iter()
        .map(|r| LogGammaRow { x: r[0], value: r[1] })
        .collect())
}

pub fn mittag_leffler_table() -> Result<Vec<MittagLefflerRow>> {
    Ok(read_table("mittag_leffler.txt", 4)?
        .into_iter()
        .map(|r| MittagLefflerRow { a: r[0], b: r[1], x: r[2], value: r[3] })
        .collect())
}

pub fn r0_excess_table() -> Result<Vec<R0ExcessRow>> {
    Ok(read_table("r0_excess.txt", 5)?
        .into_iter()
        .map(|r| R0ExcessRow { k: r[0] as u32, c: r[1], a: r[2], r: r[3], excess: r[4] })
        .collect())
}
