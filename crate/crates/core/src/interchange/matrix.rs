//! Dense row-major `f32` matrices and the `.cnmf` binary format.
//!
//! Layout (little-endian):
//! - bytes 0..4: magic `CNMF`
//! - bytes 4..6: version, u16 = 1
//! - byte 6: dtype code, u8 = 1 (f32)
//! - byte 7: reserved, u8 = 0
//! - bytes 8..16: rows, u64
//! - bytes 16..24: cols, u64
//! - bytes 24..: rows * cols f32 values, row-major

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CNMF";
pub const FORMAT_VERSION: u16 = 1;
pub const DTYPE_F32: u8 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixF32 {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl MatrixF32 {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "matrix",
                format!("{} values ({rows}x{cols})", rows * cols),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(Error::shape(
                    format!("row {i}"),
                    format!("{m} columns"),
                    format!("{} columns", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        Self::new(n, m, data)
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f32) {
        self.data[row * self.cols + col] = value;
    }

    /// Checks that every entry is finite and `>= 0`, naming `file` in the error.
    pub fn check_nonneg(&self, file: &str) -> Result<()> {
        for (idx, &v) in self.data.iter().enumerate() {
            let (row, col) = (idx / self.cols, idx % self.cols);
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    file: file.to_string(),
                    row,
                    col,
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    file: file.to_string(),
                    row,
                    col,
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows, self.cols), |(i, j)| {
            f64::from(self.data[i * self.cols + j])
        })
    }

    pub fn from_array(a: &Array2<f64>) -> Self {
        let data = a.iter().map(|&v| v as f32).collect();
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            data,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::EmptyMatrix {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(DTYPE_F32);
        out.push(0);
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    /// Parses a `.cnmf` byte image; `path` is only used in error messages.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let truncated = |expected: u64| Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        };
        if bytes.len() < 4 {
            return Err(truncated(HEADER_LEN as u64));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
                found: magic,
            });
        }
        if bytes.len() < HEADER_LEN {
            return Err(truncated(HEADER_LEN as u64));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                path: path.to_path_buf(),
                version,
            });
        }
        if bytes[6] != DTYPE_F32 {
            return Err(Error::UnsupportedDtype {
                path: path.to_path_buf(),
                code: bytes[6],
            });
        }
        let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let format_err = |detail: String| Error::Format {
            path: path.to_path_buf(),
            detail,
        };
        if rows == 0 || cols == 0 {
            return Err(format_err(format!("empty dimension {rows}x{cols}")));
        }
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .and_then(|n| n.checked_add(HEADER_LEN as u64))
            .ok_or_else(|| format_err(format!("dimensions {rows}x{cols} overflow")))?;
        let actual = bytes.len() as u64;
        if actual < expected {
            return Err(truncated(expected));
        }
        if actual > expected {
            return Err(format_err(format!(
                "{} trailing bytes after payload",
                actual - expected
            )));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(Self {
            rows: rows as usize,
            cols: cols as usize,
            data,
        })
    }
}

pub fn write_matrix(m: &MatrixF32, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = m.to_bytes()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<MatrixF32> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    MatrixF32::from_bytes(&bytes, path)
}

/// Divides every entry by `max_value`, mapping `[0, max_value]` onto `[0, 1]`.
pub fn scale_pixels_unit(d: &MatrixF32, max_value: f32) -> Result<MatrixF32> {
    if !(max_value.is_finite() && max_value > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "max_value must be positive and finite, got {max_value}"
        )));
    }
    let mut data = Vec::with_capacity(d.data.len());
    for (index, &value) in d.data.iter().enumerate() {
        if !(0.0..=max_value).contains(&value) {
            return Err(Error::OutOfRange {
                index,
                value,
                max_value,
            });
        }
        data.push(value / max_value);
    }
    MatrixF32::new(d.rows, d.cols, data)
}
