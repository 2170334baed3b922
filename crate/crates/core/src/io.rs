//! Plain-text matrix files.
//!
//! The first line holds `rows cols`; the entries follow in row-major order,
//! one matrix row per line, whitespace separated, written in scientific
//! notation with 17 significant digits so that every `f64` round-trips.
//! Vectors are stored as `len 1` matrices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 25 + 16);
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Format(format!("missing {what} in header")))?
            .parse::<usize>()
            .map_err(|e| Error::Format(format!("bad {what} in header: {e}")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let data = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Format(format!("bad entry '{t}': {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if data.len() != rows * cols {
        return Err(Error::Format(format!(
            "header says {rows}x{cols} but {} entries follow",
            data.len()
        )));
    }
    DenseMatrix::from_row_major(rows, cols, data)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn write_vector(path: impl AsRef<Path>, v: &DenseVector) -> Result<()> {
    write_matrix(path, &DenseMatrix::from_row_major(v.len(), 1, v.as_slice().to_vec())?)
}

/// Reads an `n x 1` (or `1 x n`) matrix file as a vector.
pub fn read_vector(path: impl AsRef<Path>) -> Result<DenseVector> {
    let m = read_matrix(path)?;
    if m.cols() != 1 && m.rows() != 1 {
        return Err(Error::Format(format!(
            "expected a vector file, found a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    DenseVector::new(m.into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_layout() {
        let m = DenseMatrix::from_rows(&[vec![1.0, -2.5], vec![0.0, 3.0e-20]]).unwrap();
        let text = format_matrix(&m);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("2 2"));
        assert_eq!(lines.next(), Some("1.0000000000000000e0 -2.5000000000000000e0"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(matches!(parse_matrix("2 2\n1 2 3"), Err(Error::Format(_))));
        assert!(matches!(parse_matrix("x 2\n"), Err(Error::Format(_))));
        assert!(matches!(parse_matrix("1 1\nabc"), Err(Error::Format(_))));
        assert!(parse_matrix("1 1\ninf").is_err());
        assert!(read_matrix("/nonexistent/dir/a.txt").unwrap_err().is_io());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            (r, c, data) in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
                (Just(r), Just(c), prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL, r * c))
            })
        ) {
            let m = DenseMatrix::from_row_major(r, c, data).unwrap();
            prop_assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
        }
    }
}
