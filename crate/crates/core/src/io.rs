//! Matrix files: CSV (one row per line, `.` decimal separator) and JSON
//! (`{"rows": n, "cols": n, "data": [...]}` row-major).

use std::fmt::Write as _;
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

impl MatrixFormat {
    /// `.json` selects JSON; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => MatrixFormat::Json,
            _ => MatrixFormat::Csv,
        }
    }
}

fn parse_literal(field: &str, line: usize, col: usize) -> Result<f64> {
    let t = field.trim();
    let well_formed = !t.is_empty()
        && t.bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    let value = if well_formed { t.parse::<f64>().ok() } else { None };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            msg: format!("field {} is not a decimal literal: '{t}'", col + 1),
        }),
    }
}

pub fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let row = raw
            .split(',')
            .enumerate()
            .map(|(col, f)| parse_literal(f, line, col))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("{} fields, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no matrix rows".into(),
        });
    }
    DenseMatrix::from_rows(&rows)
}

pub fn parse_json(text: &str) -> Result<DenseMatrix> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Rows as comma-separated shortest round-trip literals.
pub fn to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn to_json(m: &DenseMatrix) -> String {
    serde_json::to_string(m).expect("finite matrix serializes")
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path)?;
    match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => parse_csv(&text),
        MatrixFormat::Json => parse_json(&text),
    }
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let text = match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => to_csv(m),
        MatrixFormat::Json => to_json(m),
    };
    std::fs::write(path, text)?;
    Ok(())
}
