//! Sparse matrix text format (MacKay alist).
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! col_degree_1 … col_degree_n
//! row_degree_1 … row_degree_m
//! <n lines: 1-based row indices per column, 0-padded>
//! <m lines: 1-based column indices per row, 0-padded>
//! ```
//!
//! Tokens are read as a flat whitespace-separated stream, so line wrapping
//! does not matter. Zero entries are padding and skipped.

use super::{CodeError, Gf2Matrix};

pub fn parse(text: &str) -> Result<Gf2Matrix, CodeError> {
    let mut tokens = text.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|_| CodeError::Parse(format!("not a non-negative integer: {t:?}")))
    });
    let mut next = |what: &str| -> Result<usize, CodeError> {
        tokens
            .next()
            .unwrap_or_else(|| Err(CodeError::Parse(format!("unexpected end of input reading {what}"))))
    };

    let n = next("n")?;
    let m = next("m")?;
    if n == 0 || m == 0 || m >= n {
        return Err(CodeError::Parse(format!("invalid dimensions n={n}, m={m}")));
    }
    let max_col = next("max column degree")?;
    let max_row = next("max row degree")?;
    let col_deg: Vec<usize> = (0..n).map(|_| next("column degree")).collect::<Result<_, _>>()?;
    let row_deg: Vec<usize> = (0..m).map(|_| next("row degree")).collect::<Result<_, _>>()?;
    if col_deg.iter().any(|&d| d > max_col) || row_deg.iter().any(|&d| d > max_row) {
        return Err(CodeError::Parse("degree exceeds declared maximum".into()));
    }

    let mut h = Gf2Matrix::zeros(m, n);
    for (c, &deg) in col_deg.iter().enumerate() {
        let mut seen = 0;
        for _ in 0..max_col {
            let r = next("column entry")?;
            if r == 0 {
                continue;
            }
            if r > m {
                return Err(CodeError::Parse(format!("row index {r} out of range in column {}", c + 1)));
            }
            h.set(r - 1, c, 1);
            seen += 1;
        }
        if seen != deg {
            return Err(CodeError::Parse(format!(
                "column {} lists {seen} entries, degree says {deg}",
                c + 1
            )));
        }
    }

    let mut from_rows = Gf2Matrix::zeros(m, n);
    for (r, &deg) in row_deg.iter().enumerate() {
        let mut seen = 0;
        for _ in 0..max_row {
            let c = next("row entry")?;
            if c == 0 {
                continue;
            }
            if c > n {
                return Err(CodeError::Parse(format!("column index {c} out of range in row {}", r + 1)));
            }
            from_rows.set(r, c - 1, 1);
            seen += 1;
        }
        if seen != deg {
            return Err(CodeError::Parse(format!("row {} lists {seen} entries, degree says {deg}", r + 1)));
        }
    }
    if from_rows != h {
        return Err(CodeError::Parse("column and row adjacency lists disagree".into()));
    }
    Ok(h)
}

/// Serializes `h` in alist form with 0-padded adjacency lines.
pub fn write(h: &Gf2Matrix) -> String {
    let (m, n) = (h.rows(), h.cols());
    let cols: Vec<Vec<usize>> = (0..n)
        .map(|c| (0..m).filter(|&r| h.get(r, c) == 1).map(|r| r + 1).collect())
        .collect();
    let rows: Vec<Vec<usize>> = (0..m)
        .map(|r| (0..n).filter(|&c| h.get(r, c) == 1).map(|c| c + 1).collect())
        .collect();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let padded = |v: &[usize], width: usize| {
        let mut v = v.to_vec();
        v.resize(width, 0);
        join(&v)
    };

    let mut out = format!("{n} {m}\n{max_col} {max_row}\n");
    out += &join(&cols.iter().map(Vec::len).collect::<Vec<_>>());
    out.push('\n');
    out += &join(&rows.iter().map(Vec::len).collect::<Vec<_>>());
    out.push('\n');
    for c in &cols {
        out += &padded(c, max_col);
        out.push('\n');
    }
    for r in &rows {
        out += &padded(r, max_row);
        out.push('\n');
    }
    out
}
