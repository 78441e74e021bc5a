//! Dense row-major `f64` matrices and the plain-text interchange format.
//!
//! The text format is one matrix per file: an optional first line
//! `# rows=<r> cols=<c>`, then one row per line, entries comma-separated and
//! written in scientific notation with however many digits round-trip the
//! exact `f64` bit pattern. Reading a written file reproduces the matrix
//! bit-for-bit.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Dense row-major matrix of finite `f64` values.
///
/// Constructors reject empty shapes and non-finite entries, so a `Matrix`
/// never stores NaN or infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build a matrix from row-major data. Errors if the shape is empty,
    /// the data length does not match, or any entry is non-finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("matrix shape {rows}x{cols} is empty")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "data length {} does not match shape {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite entry {bad} in matrix data")));
        }
        Ok(Self { rows, cols, data })
    }

    /// Internal constructor for values produced by our own arithmetic.
    #[inline]
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert!(rows > 0 && cols > 0 && data.len() == rows * cols);
        debug_assert!(data.iter().all(|v| v.is_finite()), "non-finite entry escaped");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix shape");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m.data[i * k + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("no rows".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Set one entry; rejects non-finite values so the invariant holds.
    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::Parameter(format!("non-finite entry {v}")));
        }
        self.data[i * self.cols + j] = v;
        Ok(())
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.at(i, j);
            }
        }
        Matrix::from_raw(self.cols, self.rows, out)
    }

    /// `self * other`.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (r, inner, c) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let arow = self.row(i);
            let orow = &mut out[i * c..(i + 1) * c];
            for (a, brow) in arow.iter().zip(other.data.chunks_exact(c)) {
                if *a != 0.0 {
                    for (o, b) in orow.iter_mut().zip(brow) {
                        *o += a * b;
                    }
                }
            }
            debug_assert_eq!(arow.len(), inner);
        }
        Ok(Matrix::from_raw(r, c, out))
    }

    /// `self * other^T`. Row-by-row dot products; both operands are walked
    /// contiguously, which keeps the optimizer's hot loop cache-friendly.
    pub fn mul_transpose_b(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by transpose of {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (r, c) = (self.rows, other.rows);
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            let arow = self.row(i);
            for j in 0..c {
                let brow = other.row(j);
                let mut acc = 0.0;
                for (a, b) in arow.iter().zip(brow) {
                    acc += a * b;
                }
                out.push(acc);
            }
        }
        Ok(Matrix::from_raw(r, c, out))
    }

    /// `self^T * other`, accumulated row-by-row so the inner loops stream
    /// over contiguous memory.
    pub fn transpose_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply transpose of {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (r, c) = (self.cols, other.cols);
        let mut out = vec![0.0; r * c];
        for i in 0..self.rows {
            let arow = self.row(i);
            let brow = other.row(i);
            for (a, orow) in arow.iter().zip(out.chunks_exact_mut(c)) {
                if *a != 0.0 {
                    for (o, b) in orow.iter_mut().zip(brow) {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(Matrix::from_raw(r, c, out))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot subtract {}x{} from {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix::from_raw(self.rows, self.cols, data))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entry-wise difference. Errors on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Determinant via LU. Square matrices only; used by tests and sanity
    /// checks, not hot paths.
    pub fn det(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(crate::linalg::to_na(self).determinant())
    }

    /// Serialize in the text interchange format (always with the header).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# rows={} cols={}", self.rows, self.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v:e}");
            }
            s.push('\n');
        }
        s
    }

    /// Parse the text interchange format. The `# rows=.. cols=..` header is
    /// optional; when present it must match the body.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).peekable();
        let mut declared: Option<(usize, usize)> = None;
        if let Some(first) = lines.peek() {
            if first.starts_with('#') {
                declared = Some(parse_header(first)?);
                lines.next();
            }
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                let field = field.trim();
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad matrix entry {field:?}")))?;
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite matrix entry {field:?}")));
                }
                row.push(v);
            }
            rows.push(row);
        }
        let m = Matrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some((r, c)) = declared {
            if (r, c) != (m.rows, m.cols) {
                return Err(Error::Parse(format!(
                    "header declares {r}x{c} but body is {}x{}",
                    m.rows, m.cols
                )));
            }
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let err = || Error::Parse(format!("bad matrix header {line:?}, expected `# rows=<r> cols=<c>`"));
    let mut parts = line.split_whitespace();
    if parts.next() != Some("#") {
        return Err(err());
    }
    let rows = parts
        .next()
        .and_then(|p| p.strip_prefix("rows="))
        .and_then(|p| p.parse::<usize>().ok())
        .ok_or_else(err)?;
    let cols = parts
        .next()
        .and_then(|p| p.strip_prefix("cols="))
        .and_then(|p| p.parse::<usize>().ok())
        .ok_or_else(err)?;
    if parts.next().is_some() {
        return Err(err());
    }
    Ok((rows, cols))
}
