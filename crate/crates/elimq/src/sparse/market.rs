//! Matrix Market coordinate format, the exchange format for the lab corpus.
//!
//! Supported banner: `%%MatrixMarket matrix coordinate <real|pattern>
//! <general|symmetric>`. Indices are 1-based in files, converted to 0-based
//! here. Symmetric files are expanded to full storage on load.

use std::fmt::Write as _;

use super::{SparseError, SparseMatrix};
use crate::scalar::Real;

pub fn load_matrix_market<T: Real>(text: &str) -> Result<SparseMatrix<T>, SparseError> {
    let mut lines = text.lines().enumerate();

    let (_, banner) = lines
        .next()
        .ok_or_else(|| SparseError::MalformedHeader("empty input".into()))?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(SparseError::MalformedHeader(banner.into()));
    }
    if tokens[2] != "coordinate" {
        return Err(SparseError::MalformedHeader(format!(
            "unsupported format '{}'",
            tokens[2]
        )));
    }
    let pattern_only = match tokens[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => {
            return Err(SparseError::MalformedHeader(format!(
                "unsupported field '{other}'"
            )))
        }
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(SparseError::MalformedHeader(format!(
                "unsupported symmetry '{other}'"
            )))
        }
    };

    // size line: first non-comment, non-blank line
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(SparseError::MalformedHeader(format!(
                        "bad size line '{line}'"
                    )));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| SparseError::MalformedHeader(format!("bad size line '{line}'")))
                };
                let (rows, cols, nnz) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                if rows != cols {
                    return Err(SparseError::NonSquare { rows, cols });
                }
                size = Some((rows, cols, nnz));
            }
            Some((n, _, _)) => {
                let want = if pattern_only { 2 } else { 3 };
                if fields.len() != want {
                    return Err(SparseError::InvalidEntry(format!(
                        "line {}: expected {want} fields, got '{line}'",
                        lineno + 1
                    )));
                }
                let row: usize = fields[0]
                    .parse()
                    .map_err(|_| SparseError::InvalidEntry(format!("bad row index '{}'", fields[0])))?;
                let col: usize = fields[1]
                    .parse()
                    .map_err(|_| SparseError::InvalidEntry(format!("bad col index '{}'", fields[1])))?;
                if row == 0 || col == 0 || row > n || col > n {
                    return Err(SparseError::IndexOutOfRange { line: lineno + 1, row, col, n });
                }
                let value = if pattern_only {
                    T::one()
                } else {
                    let v: f64 = fields[2].parse().map_err(|_| {
                        SparseError::InvalidEntry(format!("bad value '{}'", fields[2]))
                    })?;
                    T::from_f64_lossy(v)
                };
                let (r0, c0) = (row - 1, col - 1);
                triplets.push((r0, c0, value));
                if symmetric && r0 != c0 {
                    triplets.push((c0, r0, value));
                }
            }
        }
    }

    let (n, _, nnz) = size.ok_or_else(|| SparseError::MalformedHeader("missing size line".into()))?;
    let stored = if symmetric {
        // off-diagonals were doubled on expansion
        triplets.iter().filter(|&&(r, c, _)| r <= c).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(SparseError::InvalidEntry(format!(
            "size line declares {nnz} entries, found {stored}"
        )));
    }
    SparseMatrix::from_triplets(n, triplets)
}

/// Serializes to coordinate/real/general form, 1-based, one entry per line.
/// Deterministic: entries in sorted order, values via Rust's shortest
/// round-trip float formatting.
pub fn write_matrix_market<T: Real>(m: &SparseMatrix<T>) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", m.n(), m.n(), m.nnz());
    for (r, c, v) in m.triplets() {
        let _ = writeln!(out, "{} {} {}", r + 1, c + 1, v);
    }
    out
}
