//! Dense row-major binary64 matrices and their text representation.
//!
//! The text format is a header line `rows cols` followed by `rows` lines of
//! `cols` whitespace-separated decimal literals. Values are written in their
//! shortest round-trip form, so writing and re-reading a matrix reproduces it
//! bit for bit.

use std::fmt::{self, Write as _};
use std::io::{self, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A dense `rows × cols` matrix of binary64 values stored row-major.
///
/// Matrices built through [`DenseMatrix::new`] and friends hold only finite
/// entries. [`DenseMatrix::corrupted`] is the single way to hold NaN or
/// infinite values, used to model bit-flip corruption of a result.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let m = Self::corrupted(rows, cols, data)?;
        if let Some(pos) = m.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols, col: pos % cols, value: m.data[pos] });
        }
        Ok(m)
    }

    /// Builds a matrix that may contain NaN or infinite entries.
    pub fn corrupted(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dimension(format!("matrix dimensions must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.as_ref().len() != cols) {
            return Err(Error::dimension(format!("row {i} has {} entries, expected {cols}", r.as_ref().len())));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    /// # Panics
    ///
    /// Panics if the dimensions are zero or `f` produces a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data).expect("from_fn produced an invalid matrix")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Internal constructor for results of arithmetic on valid operands.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// True when both matrices have the same shape and identical bit patterns.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self::from_parts(self.cols, self.rows, data)
    }

    /// Elementwise absolute value.
    pub fn abs(&self) -> Self {
        Self::from_parts(self.rows, self.cols, self.data.iter().map(|v| v.abs()).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy with `f` applied to the entry at `(row, col)`.
    #[cfg(test)]
    pub(crate) fn with_entry(&self, row: usize, col: usize, f: impl FnOnce(f64) -> f64) -> Self {
        let mut out = self.clone();
        let idx = row * self.cols + col;
        out.data[idx] = f(out.data[idx]);
        out
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|&v| format_value(v)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses the text format. Non-finite literals are rejected.
    pub fn parse_text(text: &str) -> Result<Self> {
        parse(text, false)
    }

    /// Parses the text format, accepting `NaN`/`inf` entries.
    pub fn parse_text_corrupted(text: &str) -> Result<Self> {
        parse(text, true)
    }

    pub fn read_from(mut reader: impl Read) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse_text_corrupted(&text)
    }

    pub fn write_to(&self, mut writer: impl Write) -> io::Result<()> {
        writer.write_all(self.to_text().as_bytes())
    }

    /// Loads a matrix file. NaN and infinite entries are accepted so that
    /// corrupted results can be verified; callers that need a finite matrix
    /// should check [`DenseMatrix::is_finite`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_text_corrupted(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Shortest round-trip decimal: plain notation for moderate magnitudes,
/// scientific otherwise.
pub(crate) fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn parse(text: &str, allow_non_finite: bool) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (header_no, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "empty input, expected `rows cols` header".into(),
    })?;
    let header_fields: Vec<(usize, &str)> = fields(header).collect();
    if header_fields.len() != 2 {
        return Err(Error::Parse {
            line: header_no + 1,
            column: 1,
            message: format!("header must be `rows cols`, found {} fields", header_fields.len()),
        });
    }
    let dim = |(col, tok): (usize, &str)| -> Result<usize> {
        match tok.parse::<usize>() {
            Ok(d) if d > 0 => Ok(d),
            _ => Err(Error::Parse { line: header_no + 1, column: col, message: format!("invalid dimension `{tok}`") }),
        }
    };
    let rows = dim(header_fields[0])?;
    let cols = dim(header_fields[1])?;

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (line_no, line) in lines {
        if seen_rows == rows {
            return Err(Error::Parse {
                line: line_no + 1,
                column: 1,
                message: format!("unexpected extra row, header declares {rows} rows"),
            });
        }
        let mut count = 0;
        for (col, tok) in fields(line) {
            let value: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no + 1,
                column: col,
                message: format!("invalid number `{tok}`"),
            })?;
            if !allow_non_finite && !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no + 1,
                    column: col,
                    message: format!("non-finite value `{tok}`"),
                });
            }
            count += 1;
            if count > cols {
                return Err(Error::Parse {
                    line: line_no + 1,
                    column: col,
                    message: format!("too many entries, expected {cols}"),
                });
            }
            data.push(value);
        }
        if count < cols {
            return Err(Error::Parse {
                line: line_no + 1,
                column: line.len() + 1,
                message: format!("expected {cols} entries, found {count}"),
            });
        }
        seen_rows += 1;
    }
    if seen_rows < rows {
        return Err(Error::Parse {
            line: text.lines().count() + 1,
            column: 1,
            message: format!("expected {rows} rows, found {seen_rows}"),
        });
    }
    DenseMatrix::corrupted(rows, cols, data)
}

/// Whitespace-separated tokens with their 1-based column.
fn fields(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (offset + 1, tok)
    })
}
