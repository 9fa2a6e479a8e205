//! Minimal dense linear algebra for small square systems.
//!
//! The stationary solves and stability diagnostics act on G x G matrices where
//! G is the number of group pairs (G = K(K+1)/2, typically at most 6). At that
//! size a compact row-major matrix with partial-pivot elimination covers
//! everything we need; a full linear-algebra dependency would only add
//! conversion layers around the scalar trait.

use thiserror::Error;

use crate::scalar::Scalar;

/// Errors from constructing or factorizing a [`SquareMatrix`].
#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    /// A row had a different length than the matrix dimension.
    #[error("row {row} has length {got}, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        got: usize,
    },
    /// The matrix had no rows.
    #[error("matrix must have at least one row")]
    Empty,
    /// An entry was NaN or infinite.
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    /// Elimination hit a zero pivot column: the matrix is singular to working
    /// precision.
    #[error("matrix is singular to working precision")]
    Singular,
    /// A vector argument did not match the matrix dimension.
    #[error("vector has length {got}, expected {expected}")]
    VectorLength { expected: usize, got: usize },
}

/// Dense row-major square matrix over a [`Scalar`].
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Scalar> SquareMatrix<F> {
    /// Creates an `n x n` matrix of zeros.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![F::zero(); n * n],
        }
    }

    /// Creates the `n x n` identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    /// Builds a matrix from row vectors, validating shape and finiteness.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::Empty`] for zero rows, [`LinalgError::RowLength`]
    /// for a ragged row, and [`LinalgError::NonFinite`] for NaN or infinite
    /// entries.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::RowLength {
                    row: i,
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
                data.push(v);
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Matrix dimension.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry accessor.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> F {
        self.data[row * self.n + col]
    }

    /// Entry mutator.
    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: F) {
        self.data[row * self.n + col] = value;
    }

    /// Returns the rows as owned vectors (used by serializers).
    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j) == F::zero()))
    }

    /// True when every entry is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= F::zero())
    }

    /// Returns this matrix scaled by `factor`.
    pub fn scaled(&self, factor: F) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }

    /// Matrix-vector product `self * x`.
    ///
    /// # Panics
    ///
    /// Panics if `x.len() != n` (internal callers guarantee the dimension).
    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).map(|(&a, &b)| a * b).sum()
            })
            .collect()
    }

    /// Matrix product `self * other`.
    ///
    /// # Panics
    ///
    /// Panics if the dimensions differ (internal callers guarantee them).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a != F::zero() {
                    for j in 0..n {
                        out.data[i * n + j] += a * other.data[k * n + j];
                    }
                }
            }
        }
        out
    }

    /// Maximum absolute column sum (the induced 1-norm).
    pub fn norm_one(&self) -> F {
        let mut best = F::zero();
        for j in 0..self.n {
            let s: F = (0..self.n).map(|i| self.get(i, j).abs()).sum();
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::VectorLength`] on a dimension mismatch and
    /// [`LinalgError::Singular`] when a pivot column is exactly zero.
    pub fn solve(&self, b: &[F]) -> Result<Vec<F>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::VectorLength {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&p, &q| {
                    a[p * n + col]
                        .abs()
                        .partial_cmp(&a[q * n + col].abs())
                        .expect("finite entries")
                })
                .expect("non-empty pivot range");
            if a[pivot_row * n + col] == F::zero() {
                return Err(LinalgError::Singular);
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                x.swap(col, pivot_row);
            }
            let pivot = a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                if factor != F::zero() {
                    for j in col..n {
                        let v = a[col * n + j];
                        a[row * n + j] -= factor * v;
                    }
                    x[row] = x[row] - factor * x[col];
                }
            }
        }
        for col in (0..n).rev() {
            let mut acc = x[col];
            for j in col + 1..n {
                acc -= a[col * n + j] * x[j];
            }
            x[col] = acc / a[col * n + col];
        }
        Ok(x)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::Singular`] when a pivot column is exactly zero.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&p, &q| {
                    a[p * n + col]
                        .abs()
                        .partial_cmp(&a[q * n + col].abs())
                        .expect("finite entries")
                })
                .expect("non-empty pivot range");
            if a[pivot_row * n + col] == F::zero() {
                return Err(LinalgError::Singular);
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                    inv.data.swap(col * n + j, pivot_row * n + j);
                }
            }
            let pivot = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= pivot;
                inv.data[col * n + j] /= pivot;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[row * n + col];
                if factor != F::zero() {
                    for j in 0..n {
                        let av = a[col * n + j];
                        let iv = inv.data[col * n + j];
                        a[row * n + j] -= factor * av;
                        inv.data[row * n + j] -= factor * iv;
                    }
                }
            }
        }
        Ok(inv)
    }

    /// 1-norm condition number estimate `||M||_1 * ||M^-1||_1`.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::Singular`] when the matrix cannot be inverted.
    pub fn condition_one(&self) -> Result<F, LinalgError> {
        Ok(self.norm_one() * self.inverse()?.norm_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn solve_recovers_known_solution() {
        let m = SquareMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        let x_true = [1.0, -2.0, 3.0];
        let b = m.matvec(&x_true);
        let x = m.solve(&b).unwrap();
        for (got, want) in x.iter().zip(x_true.iter()) {
            assert!(close(*got, *want, 1e-12), "solve component {got} != {want}");
        }
    }

    #[test]
    fn solve_requires_pivoting() {
        // Zero in the (0, 0) position forces a row swap.
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = m.solve(&[2.0, 3.0]).unwrap();
        assert!(
            close(x[0], 3.0, 1e-15) && close(x[1], 2.0, 1e-15),
            "swap solve failed: {x:?}"
        );
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(m.solve(&[1.0, 2.0]).unwrap_err(), LinalgError::Singular);
        assert_eq!(m.inverse().unwrap_err(), LinalgError::Singular);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = SquareMatrix::from_rows(&[
            vec![2.0, 1.0, 0.5],
            vec![0.1, 3.0, 0.2],
            vec![0.3, 0.4, 1.5],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        for i in 0..3 {
            let e: Vec<f64> = (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
            let col = inv.matvec(&m.matvec(&e));
            for (j, v) in col.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    close(*v, want, 1e-12),
                    "inverse product entry ({i},{j}) = {v}"
                );
            }
        }
    }

    #[test]
    fn ragged_rows_and_nonfinite_entries_are_rejected() {
        assert_eq!(
            SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err(),
            LinalgError::RowLength {
                row: 1,
                expected: 2,
                got: 1
            }
        );
        assert_eq!(
            SquareMatrix::from_rows(&[vec![1.0, f64::NAN], vec![3.0, 4.0]]).unwrap_err(),
            LinalgError::NonFinite { row: 0, col: 1 }
        );
        assert_eq!(
            SquareMatrix::<f64>::from_rows(&[]).unwrap_err(),
            LinalgError::Empty
        );
    }

    #[test]
    fn condition_number_of_identity_is_one() {
        let id = SquareMatrix::<f64>::identity(4);
        assert!(
            close(id.condition_one().unwrap(), 1.0, 1e-15),
            "cond(I) must be 1"
        );
    }
}
