//! Seeded random inputs for property checks.
//!
//! All generators draw from a caller-supplied RNG so a fixed seed fixes the
//! whole sample list.

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cpm::CpmMorphism;
use crate::tensor::Matrix;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Entries are independent standard complex normals.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix<Complex64> {
    Matrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Real entries drawn uniformly from `[-1, 1)`.
pub fn random_real_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix<Complex64> {
    Matrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
}

/// A `rows x cols` matrix with orthonormal columns (`rows >= cols`), by
/// Gram-Schmidt on a Gaussian matrix.
///
/// # Panics
/// If `rows < cols`.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix<Complex64> {
    assert!(rows >= cols, "an isometry needs rows >= cols");
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v: Vec<Complex64> = (0..rows).map(|_| complex_normal(rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let overlap = b
                    .iter()
                    .zip(&v)
                    .fold(Complex64::zero(), |acc, (x, y)| acc + x.conj() * y);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    Matrix::from_fn(rows, cols, |i, j| basis[j][i])
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix<Complex64> {
    random_isometry(rng, d, d)
}

/// Random Kraus family with `ancilla` Gaussian slices. Not trace preserving.
pub fn random_cpm<R: Rng + ?Sized>(
    rng: &mut R,
    dim_in: usize,
    dim_out: usize,
    ancilla: usize,
) -> CpmMorphism<Complex64> {
    let slices = (0..ancilla).map(|_| random_matrix(rng, dim_out, dim_in)).collect();
    CpmMorphism::new(dim_in, dim_out, slices).expect("slices share a shape")
}

/// Random trace-preserving channel: the slices of a random isometry
/// `A -> X⊗B`.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    dim_in: usize,
    dim_out: usize,
    ancilla: usize,
) -> CpmMorphism<Complex64> {
    let v = random_isometry(rng, ancilla * dim_out, dim_in);
    CpmMorphism::from_witness(dim_in, dim_out, &v).expect("witness rows are X⊗B")
}

/// The family `L_y = Σ_x U[y, x] K_x` for a random isometry `U`; it realizes
/// the same superoperator as `w`.
pub fn ancilla_rotated<R: Rng + ?Sized>(
    rng: &mut R,
    w: &CpmMorphism<Complex64>,
    new_ancilla: usize,
) -> CpmMorphism<Complex64> {
    let u = random_isometry(rng, new_ancilla, w.ancilla_dim());
    w.mix_ancilla(&u).expect("isometry shape matches the ancilla")
}
