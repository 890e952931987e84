use num_complex::Complex;
use num_traits::Zero;

use super::{Matrix, TensorError};
use crate::scalar::RealField;
use crate::tolerance::Tolerance;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted descending, with eigenvectors as the matching columns.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: RealField> {
    pub values: Vec<T>,
    pub vectors: Matrix<Complex<T>>,
}

impl<T: RealField> Eigensystem<T> {
    /// Eigenvalues with `|λ| < eps` replaced by exactly zero.
    pub fn clamped_values(&self, eps: f64) -> Vec<T> {
        let eps = T::from_f64_lossy(eps);
        self.values
            .iter()
            .map(|&l| if l.abs() < eps { T::zero() } else { l })
            .collect()
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        (0..self.vectors.rows()).map(|i| self.vectors.get(i, k)).collect()
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> Matrix<Complex<T>> {
        let n = self.values.len();
        Matrix::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::zero(), |acc, k| {
                acc + self.vectors.get(i, k) * self.vectors.get(j, k).conj() * self.values[k]
            })
        })
    }
}

/// Cyclic Jacobi diagonalisation of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a[p, q]` and then
/// applies a real plane rotation to the resulting symmetric 2x2 block.
pub fn hermitian_eig<T: RealField>(m: &Matrix<Complex<T>>, tol: &Tolerance) -> Result<Eigensystem<T>, TensorError> {
    if !m.is_square() {
        return Err(TensorError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    m.check_finite()?;
    let residual = m.hermitian_residual()?;
    if residual > tol.structural_eps {
        return Err(TensorError::NotHermitian { residual });
    }

    let n = m.rows();
    // symmetrise so rounding noise in the input cannot stall the sweeps
    let half = T::from_f64_lossy(0.5);
    let mut a = Matrix::from_fn(n, n, |i, j| (m.get(i, j) + m.get(j, i).conj()) * half);
    let mut v = Matrix::<Complex<T>>::identity(n);

    let scale = a.frobenius_norm().max(T::one());
    let threshold = T::from_f64_lossy(tol.eig_eps) * scale;
    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(TensorError::NoConvergence {
                sweeps,
                off_norm: off.to_f64_lossy(),
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }
    // convergence is quadratic, so one more sweep takes the remaining
    // off-diagonal mass from the threshold down to rounding level
    if off > T::zero() {
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .re
            .partial_cmp(&a.get(i, i).re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| a.get(k, k).re).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(Eigensystem { values, vectors })
}

fn off_diagonal_norm<T: RealField>(a: &Matrix<Complex<T>>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate<T: RealField>(a: &mut Matrix<Complex<T>>, v: &mut Matrix<Complex<T>>, p: usize, q: usize) {
    let apq = a.get(p, q);
    let mag = apq.norm();
    if mag <= T::min_positive_value() {
        return;
    }
    let one = T::one();
    let two = one + one;
    let phase = apq / mag; // e^{iφ}
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let theta = (aqq - app) / (two * mag);
    let t = {
        let t = one / (theta.abs() + (theta * theta + one).sqrt());
        if theta < T::zero() {
            -t
        } else {
            t
        }
    };
    let c = one / (t * t + one).sqrt();
    let s = t * c;
    // G = diag(1, e^{-iφ}) * [[c, s], [-s, c]] on the (p, q) plane
    let g_pp = Complex::new(c, T::zero());
    let g_pq = Complex::new(s, T::zero());
    let g_qp = phase.conj() * (-s);
    let g_qq = phase.conj() * c;

    let n = a.rows();
    // A <- A G
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * g_pp + akq * g_qp);
        a.set(k, q, akp * g_pq + akq * g_qq);
    }
    // A <- G† A
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, g_pp.conj() * apk + g_qp.conj() * aqk);
        a.set(q, k, g_pq.conj() * apk + g_qq.conj() * aqk);
    }
    a.set(p, q, Complex::zero());
    a.set(q, p, Complex::zero());
    let (dp, dq) = (a.get(p, p).re, a.get(q, q).re);
    a.set(p, p, Complex::new(dp, T::zero()));
    a.set(q, q, Complex::new(dq, T::zero()));
    // V <- V G
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * g_pp + vkq * g_qp);
        v.set(k, q, vkp * g_pq + vkq * g_qq);
    }
}

impl<T: RealField> Matrix<Complex<T>> {
    /// Convenience wrapper around [`hermitian_eig`].
    pub fn hermitian_eig(&self, tol: &Tolerance) -> Result<Eigensystem<T>, TensorError> {
        hermitian_eig(self, tol)
    }

    /// Diagonal matrix with the given complex entries.
    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { Complex::zero() })
    }
}
