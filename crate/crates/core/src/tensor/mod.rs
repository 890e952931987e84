//! Dense matrices with explicit tensor-factor bookkeeping.
//!
//! Flattening is row-major everywhere: a pair `(i, j)` over factor
//! dimensions `(d1, d2)` sits at flat index `i * d2 + j`. Every wire
//! crossing, partial trace and reshuffle in the crate relies on this.

mod eig;

use std::ops::Index;

use num_complex::Complex;

use crate::scalar::{RealField, Scalar};

pub use eig::{hermitian_eig, Eigensystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    #[error("expected {expected} entries for the declared shape, got {actual}")]
    EntryCount { expected: usize, actual: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("cannot multiply {left:?} by {right:?}")]
    InnerDimension {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("factor dimensions {dims:?} multiply to {product}, expected {expected}")]
    DimensionProduct {
        dims: Vec<usize>,
        product: usize,
        expected: usize,
    },
    #[error("{perm:?} is not a permutation of {len} factor positions")]
    InvalidPermutation { perm: Vec<usize>, len: usize },
    #[error("factor position {position} out of range for {len} factors")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// A dense `rows x cols` matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, TensorError> {
        if rows == 0 || cols == 0 {
            return Err(TensorError::EmptyShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(TensorError::EntryCount {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds from nested rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, TensorError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(TensorError::EntryCount {
                    expected: m,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Matrix::new(n, m, data)
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| S::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn scalar(s: S) -> Self {
        Matrix {
            rows: 1,
            cols: 1,
            data: vec![s],
        }
    }

    /// A column vector (ket).
    pub fn column(entries: Vec<S>) -> Result<Self, TensorError> {
        let n = entries.len();
        Matrix::new(n, 1, entries)
    }

    /// A row vector (bra / covector).
    pub fn row(entries: Vec<S>) -> Result<Self, TensorError> {
        let n = entries.len();
        Matrix::new(1, n, entries)
    }

    /// The standard basis column vector `e_i` of length `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        Self::from_fn(n, 1, |r, _| if r == i { S::one() } else { S::zero() })
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row_vec(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    /// Rows `start..start + count` as a new matrix.
    pub fn row_block(&self, start: usize, count: usize) -> Matrix<S> {
        let data = self.data[start * self.cols..(start + count) * self.cols].to_vec();
        Matrix {
            rows: count,
            cols: self.cols,
            data,
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[Matrix<S>]) -> Result<Matrix<S>, TensorError> {
        let first = blocks.first().ok_or(TensorError::EmptyShape { rows: 0, cols: 0 })?;
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            if b.cols != first.cols {
                return Err(TensorError::ShapeMismatch {
                    left: first.shape(),
                    right: b.shape(),
                });
            }
            rows += b.rows;
            data.extend_from_slice(&b.data);
        }
        Matrix::new(rows, first.cols, data)
    }

    pub fn map<R: Scalar>(&self, f: impl Fn(S) -> R) -> Matrix<R> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: S) -> Matrix<S> {
        self.map(|x| s * x)
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Matrix<S> {
        self.map(S::conj)
    }

    pub fn transpose(&self) -> Matrix<S> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Matrix<S> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, other: &Matrix<S>) -> Result<Matrix<S>, TensorError> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix<S>) -> Result<Matrix<S>, TensorError> {
        if self.cols != other.rows {
            return Err(TensorError::InnerDimension {
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = vec![S::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let dst = &mut out[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    /// Kronecker product: entry `((i, j), (k, l))` is `a[i, k] * b[j, l]`.
    pub fn kron(&self, other: &Matrix<S>) -> Matrix<S> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..self.rows {
            for j in 0..other.rows {
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    for l in 0..other.cols {
                        data.push(a * other.get(j, l));
                    }
                }
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn trace(&self) -> Result<S, TensorError> {
        if !self.is_square() {
            return Err(TensorError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).fold(S::zero(), |acc, i| acc + self.get(i, i)))
    }

    /// Reorders tensor factors on both boundaries.
    ///
    /// Output factor `k` is input factor `perm[k]`, so the output
    /// multi-index `(j_1, ..., j_n)` reads the input at the multi-index with
    /// `i_{perm[k]} = j_k`.
    pub fn permute_factors(
        &self,
        row_dims: &[usize],
        col_dims: &[usize],
        row_perm: &[usize],
        col_perm: &[usize],
    ) -> Result<Matrix<S>, TensorError> {
        let row_src = permutation_sources(row_dims, row_perm, self.rows)?;
        let col_src = permutation_sources(col_dims, col_perm, self.cols)?;
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(row_src[i], col_src[j])
        }))
    }

    /// Traces out the factors at `traced` (0-based positions into `dims`).
    pub fn partial_trace(&self, dims: &[usize], traced: &[usize]) -> Result<Matrix<S>, TensorError> {
        if !self.is_square() {
            return Err(TensorError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        check_dims(dims, self.rows)?;
        let mut is_traced = vec![false; dims.len()];
        for &p in traced {
            if p >= dims.len() {
                return Err(TensorError::PositionOutOfRange {
                    position: p,
                    len: dims.len(),
                });
            }
            is_traced[p] = true;
        }
        // split every flat index into (kept index, traced index)
        let split: Vec<(usize, usize)> = (0..self.rows)
            .map(|flat| {
                let digits = to_digits(flat, dims);
                let (mut kept, mut tr) = (0, 0);
                for (pos, (&d, &digit)) in dims.iter().zip(&digits).enumerate() {
                    if is_traced[pos] {
                        tr = tr * d + digit;
                    } else {
                        kept = kept * d + digit;
                    }
                }
                (kept, tr)
            })
            .collect();
        let kept_dim: usize = dims
            .iter()
            .zip(&is_traced)
            .filter(|(_, &t)| !t)
            .map(|(&d, _)| d)
            .product();
        let mut out = Matrix::zeros(kept_dim, kept_dim);
        for (i, &(ki, ti)) in split.iter().enumerate() {
            for (j, &(kj, tj)) in split.iter().enumerate() {
                if ti == tj {
                    let v = out.get(ki, kj) + self.get(i, j);
                    out.set(ki, kj, v);
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_residual(&self, other: &Matrix<S>) -> Result<f64, TensorError> {
        self.same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a.distance(b))
            .fold(0.0, f64::max))
    }

    /// Largest entrywise distance to the identity.
    pub fn identity_residual(&self) -> Result<f64, TensorError> {
        if !self.is_square() {
            return Err(TensorError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        self.max_residual(&Matrix::identity(self.rows))
    }

    pub fn check_finite(&self) -> Result<(), TensorError> {
        match self.data.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(k) => Err(TensorError::NonFinite {
                row: k / self.cols,
                col: k % self.cols,
            }),
        }
    }

    fn same_shape(&self, other: &Matrix<S>) -> Result<(), TensorError> {
        if self.shape() != other.shape() {
            return Err(TensorError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

/// `true` iff the max-norm of `a - b` is at most `eps`.
pub fn approx_equal<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, eps: f64) -> Result<bool, TensorError> {
    Ok(a.max_residual(b)? <= eps)
}

impl<T: RealField> Matrix<Complex<T>> {
    /// Largest `|m[i, j] - conj(m[j, i])|`.
    pub fn hermitian_residual(&self) -> Result<f64, TensorError> {
        if !self.is_square() {
            return Err(TensorError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        self.max_residual(&self.dagger())
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, TensorError> {
        Matrix::new(
            rows,
            cols,
            entries
                .iter()
                .map(|&x| Complex::new(T::from_f64_lossy(x), T::zero()))
                .collect(),
        )
    }

    /// Multiplies by a real factor.
    pub fn scale_real(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self.data.iter().enumerate().all(|(k, &x)| {
                if k / self.cols == k % self.cols {
                    x == S::one()
                } else {
                    x.is_zero()
                }
            })
    }
}

/// Mixed-radix digits of `flat` over `dims`, most significant first.
pub fn to_digits(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    digits
}

pub fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Inverse of a permutation given as a list of images.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

fn check_dims(dims: &[usize], expected: usize) -> Result<(), TensorError> {
    let product: usize = dims.iter().product();
    if product != expected || dims.contains(&0) {
        return Err(TensorError::DimensionProduct {
            dims: dims.to_vec(),
            product,
            expected,
        });
    }
    Ok(())
}

fn permutation_sources(dims: &[usize], perm: &[usize], total: usize) -> Result<Vec<usize>, TensorError> {
    check_dims(dims, total)?;
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(TensorError::InvalidPermutation {
            perm: perm.to_vec(),
            len: dims.len(),
        });
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(TensorError::InvalidPermutation {
                perm: perm.to_vec(),
                len: dims.len(),
            });
        }
        seen[p] = true;
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut src_digits = vec![0; dims.len()];
    Ok((0..total)
        .map(|flat| {
            let out_digits = to_digits(flat, &out_dims);
            for (k, &p) in perm.iter().enumerate() {
                src_digits[p] = out_digits[k];
            }
            from_digits(&src_digits, dims)
        })
        .collect())
}
