//! Dense row-major matrices over an exact ring, plus the schoolbook
//! `A^T B` oracle every coded pipeline is checked against.

use rand::Rng;

use crate::error::Error;
use crate::ring::Ring;
use crate::Result;

/// Dense row-major matrix with entries kept canonical for its ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    ring: Ring,
    entries: Vec<i128>,
}

impl DenseMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize, ring: Ring) -> DenseMatrix {
        DenseMatrix {
            rows,
            cols,
            ring,
            entries: vec![ring.canon(0); rows * cols],
        }
    }

    /// Build from explicit rows; entries are canonicalized.
    pub fn from_rows(rows: &[Vec<i128>], ring: Ring) -> Result<DenseMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                context: "ragged row lengths",
                left_rows: r,
                left_cols: c,
                right_rows: r,
                right_cols: rows.iter().map(Vec::len).max().unwrap_or(0),
            });
        }
        let entries = rows.iter().flatten().map(|&x| ring.canon(x)).collect();
        Ok(DenseMatrix {
            rows: r,
            cols: c,
            ring,
            entries,
        })
    }

    /// Uniformly random entries: the full field for `PrimeField`, small
    /// signed values for `Integers` (keeps exact products overflow-free).
    pub fn random<R: Rng>(rng: &mut R, rows: usize, cols: usize, ring: Ring) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows, cols, ring);
        for e in &mut m.entries {
            *e = match ring {
                Ring::Integers => rng.random_range(-9..=9),
                Ring::PrimeField(q) => rng.random_range(0..q),
            };
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn get(&self, r: usize, c: usize) -> i128 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i128) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.entries[r * self.cols + c] = self.ring.canon(v);
    }

    fn check_same_shape(&self, other: &DenseMatrix, context: &'static str) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context,
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(())
    }

    /// Entrywise sum.
    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other, "matrix addition")?;
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e = self.ring.add(*e, *o)?;
        }
        Ok(out)
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other, "matrix subtraction")?;
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e = self.ring.sub(*e, *o)?;
        }
        Ok(out)
    }

    /// Multiply every entry by a scalar.
    pub fn scale(&self, scalar: i128) -> Result<DenseMatrix> {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = self.ring.mul(*e, scalar)?;
        }
        Ok(out)
    }

    /// Copy of columns `lo..hi`.
    pub fn col_slice(&self, lo: usize, hi: usize) -> DenseMatrix {
        assert!(lo <= hi && hi <= self.cols, "column slice {lo}..{hi} out of bounds");
        let mut out = DenseMatrix::zeros(self.rows, hi - lo, self.ring);
        for r in 0..self.rows {
            for c in lo..hi {
                out.set(r, c - lo, self.get(r, c));
            }
        }
        out
    }

    /// Copy of rows `lo..hi`.
    pub fn row_slice(&self, lo: usize, hi: usize) -> DenseMatrix {
        assert!(lo <= hi && hi <= self.rows, "row slice {lo}..{hi} out of bounds");
        let mut out = DenseMatrix::zeros(hi - lo, self.cols, self.ring);
        for r in lo..hi {
            for c in 0..self.cols {
                out.set(r - lo, c, self.get(r, c));
            }
        }
        out
    }
}

/// Schoolbook `A^T B`: `A` is `s x k`, `B` is `s x b`, result `k x b`.
///
/// This is the reference every coded pipeline must reproduce exactly.
pub fn matmul_oracle(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch);
    }
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch {
            context: "A^T B needs matching inner dimension s",
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let ring = a.ring;
    let mut out = DenseMatrix::zeros(a.cols, b.cols, ring);
    for i in 0..a.cols {
        for j in 0..b.cols {
            let mut acc = ring.canon(0);
            for t in 0..a.rows {
                acc = ring.add(acc, ring.mul(a.get(t, i), b.get(t, j))?)?;
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}
