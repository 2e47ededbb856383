//! Plain-text matrix format.
//!
//! ```text
//! 2 2
//! 1 2
//! 3 4
//! ```
//!
//! The header holds `<rows> <cols>`; each following line holds one row of
//! whitespace-separated decimal literals. Blank lines are ignored.

use std::fmt::Write as _;

use super::Matrix;
use crate::error::{Result, SpdcError};

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> SpdcError {
    SpdcError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into `(1-based column, token)` pairs.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (offset + 1, tok)
    })
}

pub fn read_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "missing \"<rows> <cols>\" header"))?;
    let dims: Vec<(usize, &str)> = tokens(header).collect();
    if dims.len() != 2 {
        return Err(parse_err(hline, 1, "header must be \"<rows> <cols>\""));
    }
    let mut shape = [0usize; 2];
    for (slot, (col, tok)) in shape.iter_mut().zip(&dims) {
        *slot = tok
            .parse()
            .map_err(|_| parse_err(hline, *col, format!("invalid dimension {tok:?}")))?;
        if *slot == 0 {
            return Err(parse_err(hline, *col, "dimension must be positive"));
        }
    }
    let [rows, cols] = shape;

    let mut data = Vec::with_capacity(rows * cols);
    let mut last_line = hline;
    for r in 0..rows {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse_err(last_line + 1, 1, format!("expected {rows} rows, found {r}")))?;
        last_line = lno;
        let mut count = 0;
        for (col, tok) in tokens(line) {
            if count == cols {
                return Err(parse_err(lno, col, format!("row has more than {cols} entries")));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(lno, col, format!("invalid number {tok:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(lno, col, "entry is not finite"));
            }
            data.push(v);
            count += 1;
        }
        if count != cols {
            return Err(parse_err(
                lno,
                line.len() + 1,
                format!("row has {count} entries, expected {cols}"),
            ));
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(parse_err(lno, 1, format!("unexpected data after {rows} rows")));
    }
    Matrix::new(rows, cols, data)
}

/// Serialises with 17 significant digits so that reading back is lossless.
pub fn write_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_file() {
        let m = read_matrix("2 2\n1 2\n\n3 4.5\n").unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.5]]).unwrap());
    }

    #[test]
    fn reports_line_and_column() {
        match read_matrix("2 2\n1 2\n3 x4\n") {
            Err(SpdcError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match read_matrix("2 2\n1 2 3\n3 4\n") {
            Err(SpdcError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_matrix("3 3\n1 2 3\n"),
            Err(SpdcError::Parse { line: 3, .. })
        ));
        assert!(read_matrix("").is_err());
    }

    #[test]
    fn writer_is_lossless() {
        let m = Matrix::from_rows(&[[0.1, 1.0 / 3.0], [-2.5e-300, 1.7976931348623157e308]]).unwrap();
        let back = read_matrix(&write_matrix(&m)).unwrap();
        assert_eq!(
            m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            back.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
