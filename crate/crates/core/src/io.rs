//! Matrix Market coordinate files and plain-text probability vectors.

use std::io::{BufRead, Write};

use crate::chain::{validate, ProbabilityVector, StochasticMatrix};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Orientation of a stored transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Columns sum to one (`P[i][j]` is the probability of `j -> i`).
    #[default]
    ColumnStochastic,
    /// Rows sum to one; transposed on load.
    RowStochastic,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads a real coordinate matrix. `general` and `symmetric` layouts are accepted.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<DenseMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if fields[2] != "coordinate" || fields[3] != "real" {
        return Err(parse_err(1, "only coordinate real matrices are supported"));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut m = DenseMatrix::zeros(0, 0);
    let mut seen = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match dims {
            None => {
                let nums: Vec<usize> = toks
                    .iter()
                    .map(|s| s.parse().map_err(|_| parse_err(lineno, "bad size line")))
                    .collect::<Result<_>>()?;
                if nums.len() != 3 {
                    return Err(parse_err(lineno, "size line needs rows cols entries"));
                }
                dims = Some((nums[0], nums[1], nums[2]));
                m = DenseMatrix::zeros(nums[0], nums[1]);
            }
            Some((rows, cols, nnz)) => {
                if toks.len() != 3 {
                    return Err(parse_err(lineno, "entry needs row col value"));
                }
                let i: usize = toks[0].parse().map_err(|_| parse_err(lineno, "bad row index"))?;
                let j: usize = toks[1].parse().map_err(|_| parse_err(lineno, "bad column index"))?;
                let v: f64 = toks[2].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) out of range")));
                }
                if seen == nnz {
                    return Err(parse_err(lineno, "more entries than declared"));
                }
                m[(i - 1, j - 1)] += v;
                if symmetric && i != j {
                    m[(j - 1, i - 1)] += v;
                }
                seen += 1;
            }
        }
    }
    match dims {
        None => Err(parse_err(1, "missing size line")),
        Some((_, _, nnz)) if seen != nnz => Err(parse_err(0, format!("expected {nnz} entries, found {seen}"))),
        Some(_) => Ok(m),
    }
}

/// Writes the nonzero entries of `m` in column-major order.
pub fn write_matrix_market<W: Write>(m: &DenseMatrix, mut w: W) -> Result<()> {
    let mut entries = Vec::new();
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            if m[(i, j)] != 0.0 {
                entries.push((i, j, m[(i, j)]));
            }
        }
    }
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Loads and validates a transition matrix.
pub fn read_chain<R: BufRead>(reader: R, orientation: Orientation) -> Result<StochasticMatrix> {
    let m = read_matrix_market(reader)?;
    match orientation {
        Orientation::ColumnStochastic => validate(m),
        Orientation::RowStochastic => validate(m.transpose()),
    }
}

/// One float per line; blank lines and `#` comments are skipped.
pub fn read_vector<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|_| parse_err(idx + 1, format!("bad float '{t}'")))?);
    }
    Ok(out)
}

pub fn read_probability_vector<R: BufRead>(reader: R) -> Result<ProbabilityVector> {
    ProbabilityVector::new(read_vector(reader)?)
}

/// Writes with shortest round-trip formatting.
pub fn write_vector<W: Write>(v: &[f64], mut w: W) -> Result<()> {
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    Ok(())
}
