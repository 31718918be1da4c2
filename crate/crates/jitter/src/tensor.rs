//! Dense row-major matrices with deterministic arithmetic.
//!
//! Reductions fix their iteration order (rows outermost, then the shared
//! dimension in ascending order), so results are bit-identical across
//! platforms and repeated runs. Constructors and arithmetic reject NaN and
//! infinity instead of letting them propagate silently.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A dense `rows x cols` matrix of `f64` in row-major layout.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tensor2D {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Tensor2D {
    /// Builds a matrix from row-major values, rejecting non-finite entries
    /// and length mismatches.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "Tensor2D::new",
                detail: format!(
                    "{rows}x{cols} needs {} values, got {}",
                    rows * cols,
                    values.len()
                ),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "Tensor2D::new",
            });
        }
        Ok(Tensor2D { rows, cols, values })
    }

    /// An all-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2D {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    /// Borrowed view of row `r`.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    /// All values in row-major order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the raw values (row-major).
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Matrix product `self * rhs` with a fixed accumulation order: each
    /// output element sums over the shared dimension in ascending index
    /// order. Errors if the result overflows to non-finite values.
    pub fn matmul(&self, rhs: &Tensor2D) -> Result<Tensor2D> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                detail: format!("{}x{} * {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            });
        }
        let mut out = Tensor2D::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.values[i * self.cols + k];
                let row = &rhs.values[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.values[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        if !out.values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { context: "matmul" });
        }
        Ok(out)
    }

    /// The transpose of this matrix.
    pub fn transpose(&self) -> Tensor2D {
        let mut out = Tensor2D::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.values[c * self.rows + r] = self.values[r * self.cols + c];
            }
        }
        out
    }

    /// Copies the given rows (in order) into a new matrix.
    pub fn gather_rows(&self, indices: &[usize]) -> Result<Tensor2D> {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::InvalidInput {
                    context: "gather_rows",
                    detail: format!("row index {i} out of {}", self.rows),
                });
            }
            values.extend_from_slice(self.row(i));
        }
        Ok(Tensor2D {
            rows: indices.len(),
            cols: self.cols,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_checks_length_and_finiteness() {
        assert!(Tensor2D::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Tensor2D::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Tensor2D::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(Tensor2D::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).is_ok());
    }

    #[test]
    fn matmul_matches_hand_result() {
        let a = Tensor2D::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Tensor2D::new(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.values(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn matmul_rejects_bad_shapes() {
        let a = Tensor2D::zeros(2, 3);
        let b = Tensor2D::zeros(2, 3);
        assert!(matches!(
            a.matmul(&b),
            Err(Error::ShapeMismatch { op: "matmul", .. })
        ));
    }

    #[test]
    fn matmul_rejects_overflow() {
        let a = Tensor2D::new(1, 1, vec![1e308]).unwrap();
        let b = Tensor2D::new(1, 1, vec![1e308]).unwrap();
        assert!(matches!(a.matmul(&b), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn transpose_round_trips() {
        let a = Tensor2D::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let t = a.transpose();
        assert_eq!(t.rows(), 3);
        assert_eq!(t.cols(), 2);
        assert_eq!(t.get(0, 1), 4.0);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn gather_rows_copies_in_order() {
        let a = Tensor2D::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let g = a.gather_rows(&[2, 0]).unwrap();
        assert_eq!(g.values(), &[5.0, 6.0, 1.0, 2.0]);
        assert!(a.gather_rows(&[3]).is_err());
    }
}
