//! Matrix Market reader and writer, `coordinate real general` only.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Storage};

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parse a Matrix Market stream. Line numbers in errors are 1-based.
pub fn read_matrix_market(reader: impl BufRead) -> Result<Matrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_error(1, "empty file"))?;
    let header = header.map_err(|e| parse_error(1, e.to_string()))?;
    let normalized = header.split_whitespace().collect::<Vec<_>>().join(" ");
    if !normalized.to_ascii_lowercase().starts_with(&HEADER.to_ascii_lowercase()) {
        return Err(parse_error(1, format!("header must begin '{HEADER}'")));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut last = 1;
    for (no, line) in lines {
        last = no;
        let line = line.map_err(|e| parse_error(no, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
                match parsed.as_deref() {
                    Some(&[rows, cols, nnz]) if rows > 0 && cols > 0 => size = Some((rows, cols, nnz)),
                    _ => return Err(parse_error(no, "size line must be 'rows cols nnz'")),
                }
            }
            Some((rows, cols, nnz)) => {
                if fields.len() != 3 {
                    return Err(parse_error(no, "entry must be 'row col value'"));
                }
                let i: usize = fields[0].parse().map_err(|_| parse_error(no, "bad row index"))?;
                let j: usize = fields[1].parse().map_err(|_| parse_error(no, "bad column index"))?;
                let v: f64 = fields[2].parse().map_err(|_| parse_error(no, "bad value"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_error(no, format!("index ({i}, {j}) outside {rows} x {cols}")));
                }
                if !v.is_finite() {
                    return Err(parse_error(no, "non-finite value"));
                }
                if triplets.len() == nnz {
                    return Err(parse_error(no, format!("more than {nnz} entries")));
                }
                triplets.push((i - 1, j - 1, v, no));
            }
        }
    }

    let (rows, cols, nnz) = size.ok_or_else(|| parse_error(last, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse_error(last, format!("expected {nnz} entries, found {}", triplets.len())));
    }
    let mut seen = std::collections::HashSet::with_capacity(nnz);
    for &(i, j, _, no) in &triplets {
        if !seen.insert((i, j)) {
            return Err(parse_error(no, format!("duplicate entry ({}, {})", i + 1, j + 1)));
        }
    }
    Matrix::from_triplets(rows, cols, triplets.into_iter().map(|(i, j, v, _)| (i, j, v)).collect())
}

pub fn write_matrix_market(m: &Matrix, mut out: impl Write) -> std::io::Result<()> {
    let entries: Vec<(usize, usize, f64)> = match m.storage() {
        Storage::Coordinate(t) => t.clone(),
        Storage::Dense(d) => d
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(idx, v)| (idx / m.cols(), idx % m.cols(), *v))
            .collect(),
    };
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", m.rows(), m.cols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}
