//! Completely positive maps as Kraus witnesses.
//!
//! A [`CpmMorphism`] `A -> B` is the family of slices `K_x : A -> B` of a
//! pure witness `f : A -> X⊗B`. Its meaning is the [`Superoperator`] obtained
//! by doubling `f` and capping the ancilla `X`; two witnesses are equal when
//! their realizations are.
//!
//! Conventions: `vec ρ` places entry `(a', a)` at `a'·d + a`, and a
//! superoperator is indexed by row pair `(b', b)` and column pair `(a', a)`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::report::{CheckEntry, CheckReport};
use crate::scalar::{RealField, Scalar};
use crate::tensor::{hermitian_eig, Matrix, TensorError};
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CpmError {
    #[error("a Kraus family needs at least one slice")]
    EmptyKraus,
    #[error("dimensions must be at least 1")]
    ZeroDimension,
    #[error("slice {index} has shape {found:?}, expected {expected:?}")]
    SliceShape {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("witness has shape {found:?}; rows must be a multiple of {dim_out} and there must be {dim_in} columns")]
    WitnessShape {
        dim_in: usize,
        dim_out: usize,
        found: (usize, usize),
    },
    #[error("superoperator {dim_out}^2 x {dim_in}^2 expected, got {found:?}")]
    SuperoperatorShape {
        dim_in: usize,
        dim_out: usize,
        found: (usize, usize),
    },
    #[error("cannot compose: left side expects input dimension {expected}, right side outputs {found}")]
    Boundary { expected: usize, found: usize },
    #[error("map is not completely positive: Choi eigenvalue {min_eigenvalue}")]
    NotCp { min_eigenvalue: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Kraus witness of a completely positive map `A -> B`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpmMorphism<S> {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<Matrix<S>>,
}

/// Linear map on doubled spaces, `d_B² x d_A²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<S> {
    dim_in: usize,
    dim_out: usize,
    matrix: Matrix<S>,
}

/// Reshuffled superoperator, indexed by `(b', a')` against `(b, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix<S> {
    dim_in: usize,
    dim_out: usize,
    matrix: Matrix<S>,
}

impl<S: Scalar> CpmMorphism<S> {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<Matrix<S>>) -> Result<Self, CpmError> {
        if dim_in == 0 || dim_out == 0 {
            return Err(CpmError::ZeroDimension);
        }
        if kraus.is_empty() {
            return Err(CpmError::EmptyKraus);
        }
        for (index, k) in kraus.iter().enumerate() {
            if k.shape() != (dim_out, dim_in) {
                return Err(CpmError::SliceShape {
                    index,
                    expected: (dim_out, dim_in),
                    found: k.shape(),
                });
            }
        }
        Ok(CpmMorphism { dim_in, dim_out, kraus })
    }

    /// Slices of a witness `f : A -> X⊗B`: `K_x[b, a] = f[x·d_B + b, a]`.
    pub fn from_witness(dim_in: usize, dim_out: usize, f: &Matrix<S>) -> Result<Self, CpmError> {
        if dim_out == 0 || f.cols() != dim_in || !f.rows().is_multiple_of(dim_out) {
            return Err(CpmError::WitnessShape {
                dim_in,
                dim_out,
                found: f.shape(),
            });
        }
        let slices = (0..f.rows() / dim_out)
            .map(|x| f.row_block(x * dim_out, dim_out))
            .collect();
        CpmMorphism::new(dim_in, dim_out, slices)
    }

    /// The pure map itself, with a one-dimensional ancilla.
    pub fn pure(f: &Matrix<S>) -> Self {
        CpmMorphism {
            dim_in: f.cols(),
            dim_out: f.rows(),
            kraus: vec![f.clone()],
        }
    }

    pub fn identity(d: usize) -> Self {
        CpmMorphism::pure(&Matrix::identity(d))
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[Matrix<S>] {
        &self.kraus
    }

    pub fn ancilla_dim(&self) -> usize {
        self.kraus.len()
    }

    /// The stacked witness `A -> X⊗B`.
    pub fn witness(&self) -> Matrix<S> {
        Matrix::vstack(&self.kraus).expect("slices share a shape")
    }

    /// `S = Σ_x K_x ⊗ conj(K_x)`.
    pub fn realize(&self) -> Superoperator<S> {
        let matrix = self
            .kraus
            .iter()
            .map(|k| k.kron(&k.conj()))
            .reduce(|a, b| a.add(&b).expect("equal shapes"))
            .expect("nonempty family");
        Superoperator {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            matrix,
        }
    }

    /// `self ∘ f`, slices `K^self_y · K^f_x` at index `x·d_Y + y`.
    pub fn compose(&self, f: &CpmMorphism<S>) -> Result<Self, CpmError> {
        if self.dim_in != f.dim_out {
            return Err(CpmError::Boundary {
                expected: self.dim_in,
                found: f.dim_out,
            });
        }
        let mut kraus = Vec::with_capacity(f.kraus.len() * self.kraus.len());
        for kf in &f.kraus {
            for kg in &self.kraus {
                kraus.push(kg.matmul(kf)?);
            }
        }
        CpmMorphism::new(f.dim_in, self.dim_out, kraus)
    }

    /// Slices `K_x ⊗ L_z` at index `x·d_Z + z`.
    pub fn tensor(&self, other: &CpmMorphism<S>) -> Self {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|k| other.kraus.iter().map(move |l| k.kron(l)))
            .collect();
        CpmMorphism {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
        }
    }

    pub fn dagger(&self) -> Self {
        CpmMorphism {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            kraus: self.kraus.iter().map(Matrix::dagger).collect(),
        }
    }

    /// `L_y = Σ_x u[y, x] K_x`. When `u` is an isometry the realization is
    /// unchanged.
    pub fn mix_ancilla(&self, u: &Matrix<S>) -> Result<Self, CpmError> {
        if u.cols() != self.ancilla_dim() {
            return Err(CpmError::Boundary {
                expected: self.ancilla_dim(),
                found: u.cols(),
            });
        }
        let kraus = (0..u.rows())
            .map(|y| {
                self.kraus
                    .iter()
                    .enumerate()
                    .fold(Matrix::zeros(self.dim_out, self.dim_in), |acc, (x, k)| {
                        acc.add(&k.scale(u.get(y, x))).expect("equal shapes")
                    })
            })
            .collect();
        CpmMorphism::new(self.dim_in, self.dim_out, kraus)
    }

    /// `(discard_X ⊗ 1) ∘ interleave ∘ (f ⊗ conj f)` for the witness `f`,
    /// a `d_B² x d_A²` matrix. With the trace as `discard_X` this is
    /// [`CpmMorphism::realize`].
    pub fn grounded_double(&self, discard_x: &Matrix<S>) -> Result<Matrix<S>, CpmError> {
        let dx = self.ancilla_dim();
        let (db, da) = (self.dim_out, self.dim_in);
        if discard_x.shape() != (1, dx * dx) {
            return Err(CpmError::SuperoperatorShape {
                dim_in: dx,
                dim_out: 1,
                found: discard_x.shape(),
            });
        }
        let f = self.witness();
        let doubled = f.kron(&f.conj());
        let interleaved = doubled.permute_factors(&[dx, db, dx, db], &[da * da], &[0, 2, 1, 3], &[0])?;
        Ok(discard_x.kron(&Matrix::identity(db * db)).matmul(&interleaved)?)
    }
}

impl<T: RealField> CpmMorphism<Complex<T>> {
    /// `max |Σ K_x† K_x - 1|`.
    pub fn kraus_completeness_residual(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .map(|k| k.dagger().matmul(k).expect("square product"))
            .reduce(|a, b| a.add(&b).expect("equal shapes"))
            .expect("nonempty family");
        sum.identity_residual().expect("square")
    }
}

impl<S: Scalar> Superoperator<S> {
    pub fn new(dim_in: usize, dim_out: usize, matrix: Matrix<S>) -> Result<Self, CpmError> {
        if dim_in == 0 || dim_out == 0 {
            return Err(CpmError::ZeroDimension);
        }
        if matrix.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(CpmError::SuperoperatorShape {
                dim_in,
                dim_out,
                found: matrix.shape(),
            });
        }
        Ok(Superoperator {
            dim_in,
            dim_out,
            matrix,
        })
    }

    /// Infers the dimensions from a square-sized matrix.
    pub fn from_matrix(matrix: Matrix<S>) -> Result<Self, CpmError> {
        let side = |n: usize| (1..=n).find(|k| k * k >= n).filter(|k| k * k == n);
        match (side(matrix.rows()), side(matrix.cols())) {
            (Some(dim_out), Some(dim_in)) => Superoperator::new(dim_in, dim_out, matrix),
            _ => Err(CpmError::SuperoperatorShape {
                dim_in: 0,
                dim_out: 0,
                found: matrix.shape(),
            }),
        }
    }

    pub fn identity(d: usize) -> Self {
        Superoperator {
            dim_in: d,
            dim_out: d,
            matrix: Matrix::identity(d * d),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.matrix
    }

    /// `self ∘ f` as a matrix product.
    pub fn compose(&self, f: &Superoperator<S>) -> Result<Self, CpmError> {
        if self.dim_in != f.dim_out {
            return Err(CpmError::Boundary {
                expected: self.dim_in,
                found: f.dim_out,
            });
        }
        Ok(Superoperator {
            dim_in: f.dim_in,
            dim_out: self.dim_out,
            matrix: self.matrix.matmul(&f.matrix)?,
        })
    }

    /// Kron of the two matrices with the factors regrouped so that the
    /// result is indexed by `((b', d'), (b, d))` against `((a', c'), (a, c))`.
    pub fn tensor(&self, other: &Superoperator<S>) -> Self {
        let (da, db) = (self.dim_in, self.dim_out);
        let (dc, dd) = (other.dim_in, other.dim_out);
        let matrix = self
            .matrix
            .kron(&other.matrix)
            .permute_factors(&[db, db, dd, dd], &[da, da, dc, dc], &[0, 2, 1, 3], &[0, 2, 1, 3])
            .expect("dims multiply out");
        Superoperator {
            dim_in: da * dc,
            dim_out: db * dd,
            matrix,
        }
    }

    /// Hilbert-Schmidt adjoint.
    pub fn dagger(&self) -> Self {
        Superoperator {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            matrix: self.matrix.dagger(),
        }
    }

    /// `C[(b', a'), (b, a)] = S[(b', b), (a', a)]`.
    pub fn choi(&self) -> ChoiMatrix<S> {
        let (da, db) = (self.dim_in, self.dim_out);
        let matrix = Matrix::from_fn(da * db, da * db, |r, c| {
            let (bp, ap) = (r / da, r % da);
            let (b, a) = (c / da, c % da);
            self.matrix.get(bp * db + b, ap * da + a)
        });
        ChoiMatrix {
            dim_in: da,
            dim_out: db,
            matrix,
        }
    }

    pub fn residual(&self, other: &Superoperator<S>) -> Result<f64, CpmError> {
        Ok(self.matrix.max_residual(&other.matrix)?)
    }

    pub fn approx_eq(&self, other: &Superoperator<S>, eps: f64) -> Result<bool, CpmError> {
        Ok(self.residual(other)? <= eps)
    }
}

impl<T: RealField> Superoperator<Complex<T>> {
    /// `unvec(S · vec ρ)`.
    pub fn apply(&self, rho: &Matrix<Complex<T>>) -> Result<Matrix<Complex<T>>, CpmError> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(CpmError::Boundary {
                expected: self.dim_in,
                found: rho.rows(),
            });
        }
        let v = Matrix::new(self.dim_in * self.dim_in, 1, rho.data().to_vec())?;
        let out = self.matrix.matmul(&v)?;
        Ok(Matrix::new(self.dim_out, self.dim_out, out.into_data())?)
    }

    pub fn is_cp(&self, tol: &Tolerance) -> bool {
        self.choi().cp_decision(tol).is_cp
    }

    /// Kraus slices `√λ · unvec(v)` from the eigensystem of the Choi matrix.
    /// Zero eigenvalues are dropped; a zero map yields one zero slice.
    pub fn purify(&self, tol: &Tolerance) -> Result<CpmMorphism<Complex<T>>, CpmError> {
        let choi = self.choi();
        let residual = choi.matrix.hermitian_residual()?;
        if residual > tol.structural_eps {
            return Err(TensorError::NotHermitian { residual }.into());
        }
        let es = hermitian_eig(&choi.matrix, tol)?;
        let values = es.clamped_values(tol.eig_eps);
        let (da, db) = (self.dim_in, self.dim_out);
        if let Some(&min) = values.last() {
            if min < T::zero() {
                return Err(CpmError::NotCp {
                    min_eigenvalue: min.to_f64_lossy(),
                });
            }
        }
        let mut kraus: Vec<_> = values
            .iter()
            .enumerate()
            .filter(|(_, l)| **l > T::zero())
            .map(|(k, l)| {
                let s = l.sqrt();
                Matrix::from_fn(db, da, |b, a| es.vectors.get(b * da + a, k) * s)
            })
            .collect();
        if kraus.is_empty() {
            kraus.push(Matrix::zeros(db, da));
        }
        CpmMorphism::new(da, db, kraus)
    }
}

impl<S: Scalar> ChoiMatrix<S> {
    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }
}

/// Outcome of the complete-positivity test.
#[derive(Clone, Debug, PartialEq)]
pub struct CpDecision {
    pub hermitian_residual: f64,
    /// Clamped, descending. Empty when the Choi matrix is not Hermitian.
    pub eigenvalues: Vec<f64>,
    pub is_cp: bool,
}

impl CpDecision {
    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }
}

impl<T: RealField> ChoiMatrix<Complex<T>> {
    pub fn cp_decision(&self, tol: &Tolerance) -> CpDecision {
        let hermitian_residual = self.matrix.hermitian_residual().unwrap_or(f64::INFINITY);
        if hermitian_residual > tol.structural_eps {
            return CpDecision {
                hermitian_residual,
                eigenvalues: Vec::new(),
                is_cp: false,
            };
        }
        match hermitian_eig(&self.matrix, tol) {
            Ok(es) => {
                let eigenvalues: Vec<f64> = es
                    .clamped_values(tol.eig_eps)
                    .into_iter()
                    .map(|l| l.to_f64_lossy())
                    .collect();
                let is_cp = eigenvalues.iter().all(|&l| l >= 0.0);
                CpDecision {
                    hermitian_residual,
                    eigenvalues,
                    is_cp,
                }
            }
            Err(_) => CpDecision {
                hermitian_residual,
                eigenvalues: Vec::new(),
                is_cp: false,
            },
        }
    }
}

pub fn realize<S: Scalar>(w: &CpmMorphism<S>) -> Superoperator<S> {
    w.realize()
}

/// `g ∘ f`.
pub fn cpm_compose<S: Scalar>(g: &CpmMorphism<S>, f: &CpmMorphism<S>) -> Result<CpmMorphism<S>, CpmError> {
    g.compose(f)
}

pub fn cpm_tensor<S: Scalar>(f: &CpmMorphism<S>, g: &CpmMorphism<S>) -> CpmMorphism<S> {
    f.tensor(g)
}

pub fn cpm_dagger<S: Scalar>(f: &CpmMorphism<S>) -> CpmMorphism<S> {
    f.dagger()
}

/// Equality of realizations within `eps`.
pub fn cpm_equal<S: Scalar>(f: &CpmMorphism<S>, g: &CpmMorphism<S>, eps: f64) -> Result<bool, CpmError> {
    if f.dim_in != g.dim_in || f.dim_out != g.dim_out {
        return Err(CpmError::Boundary {
            expected: f.dim_in * f.dim_out,
            found: g.dim_in * g.dim_out,
        });
    }
    f.realize().approx_eq(&g.realize(), eps)
}

/// The trace functional `d² -> 1`, `t[(a', a)] = δ_{a'a}`.
pub fn discard<S: Scalar>(d: usize) -> Superoperator<S> {
    let matrix = Matrix::from_fn(1, d * d, |_, c| if c / d == c % d { S::one() } else { S::zero() });
    Superoperator {
        dim_in: d,
        dim_out: 1,
        matrix,
    }
}

/// Doubling of a pure map.
pub fn functor_p<S: Scalar>(f: &Matrix<S>) -> CpmMorphism<S> {
    CpmMorphism::pure(f)
}

/// A candidate family of discard maps, one row vector per dimension.
pub trait DiscardFamily: Sync {
    fn name(&self) -> &str;
    /// `1 x d²` row over `(a', a)`.
    fn discard(&self, d: usize) -> Matrix<Complex<f64>>;
}

/// The trace.
#[derive(Clone, Copy, Debug, Default)]
pub struct TraceDiscard;

impl DiscardFamily for TraceDiscard {
    fn name(&self) -> &str {
        "trace"
    }

    fn discard(&self, d: usize) -> Matrix<Complex<f64>> {
        discard(d).into_matrix()
    }
}

/// The trace with the sign of slot `(0, 0)` flipped.
#[derive(Clone, Copy, Debug, Default)]
pub struct SignFlippedDiscard;

impl DiscardFamily for SignFlippedDiscard {
    fn name(&self) -> &str {
        "sign-flipped trace"
    }

    fn discard(&self, d: usize) -> Matrix<Complex<f64>> {
        let mut t = discard::<Complex<f64>>(d).into_matrix();
        t.set(0, 0, -t.get(0, 0));
        t
    }
}

/// Inputs for [`check_environment`].
#[derive(Clone, Debug, Default)]
pub struct EnvironmentSamples {
    /// Dimensions checked by the monoidal and bent-wire clauses.
    pub dims: Vec<usize>,
    /// Witness pairs for the doubled-equality clause.
    pub pairs: Vec<(CpmMorphism<Complex<f64>>, CpmMorphism<Complex<f64>>)>,
    /// Completely positive maps for the purification clause.
    pub superoperators: Vec<Superoperator<Complex<f64>>>,
}

impl EnvironmentSamples {
    /// `n` witness pairs with dims up to 3. Even-indexed pairs are related by
    /// a random ancilla isometry, odd-indexed pairs are independent.
    pub fn seeded(seed: u64, n: usize) -> Self {
        use rand::Rng;
        let mut rng = crate::sampling::seeded(seed);
        let mut pairs = Vec::with_capacity(n);
        for i in 0..n {
            let da = rng.random_range(1..=3);
            let db = rng.random_range(1..=3);
            let dx = rng.random_range(1..=3);
            let f = crate::sampling::random_cpm(&mut rng, da, db, dx);
            let g = if i % 2 == 0 {
                let dy = rng.random_range(dx..=dx + 2);
                crate::sampling::ancilla_rotated(&mut rng, &f, dy)
            } else {
                let dy = rng.random_range(1..=3);
                crate::sampling::random_cpm(&mut rng, da, db, dy)
            };
            pairs.push((f, g));
        }
        let superoperators = pairs.iter().map(|(f, _)| f.realize()).collect();
        EnvironmentSamples {
            dims: vec![1, 2, 3],
            pairs,
            superoperators,
        }
    }
}

/// Checks the environment-structure equations for a discard family.
///
/// Entry names are prefixed by clause: `i/` monoidal compatibility,
/// `ii/` bent-wire form, `iii/` doubled equality, `iv/` purification.
pub fn check_environment(family: &dyn DiscardFamily, samples: &EnvironmentSamples, tol: &Tolerance) -> CheckReport {
    let eps = tol.structural_eps;
    let mut report = CheckReport::new();
    let mut dims = samples.dims.clone();
    for (f, g) in &samples.pairs {
        dims.extend([f.dim_in, f.dim_out, f.ancilla_dim(), g.ancilla_dim()]);
    }
    dims.sort_unstable();
    dims.dedup();

    let unit = family.discard(1);
    report.push(CheckEntry::residual(
        "i/unit",
        unit.max_residual(&Matrix::identity(1)).unwrap_or(f64::INFINITY),
        eps,
    ));
    for &a in &dims {
        for &b in &dims {
            let joint = family.discard(a * b);
            let split = family
                .discard(a)
                .kron(&family.discard(b))
                .permute_factors(&[1], &[a, a, b, b], &[0], &[0, 2, 1, 3])
                .expect("dims multiply out");
            report.push(CheckEntry::residual(
                format!("i/tensor {a}x{b}"),
                joint.max_residual(&split).unwrap_or(f64::INFINITY),
                eps,
            ));
        }
    }

    for &a in &dims {
        let t = family.discard(a);
        let bent = t
            .permute_factors(&[1], &[a, a], &[0], &[1, 0])
            .expect("dims multiply out")
            .conj();
        report.push(CheckEntry::residual(
            format!("ii/bent {a}"),
            t.max_residual(&bent).unwrap_or(f64::INFINITY),
            eps,
        ));
    }

    let doubled: Vec<CheckEntry> = samples
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, (f, g))| {
            let realized = cpm_equal(f, g, eps).unwrap_or(false);
            let grounded = match (
                f.grounded_double(&family.discard(f.ancilla_dim())),
                g.grounded_double(&family.discard(g.ancilla_dim())),
            ) {
                (Ok(a), Ok(b)) => a.max_residual(&b).map(|r| r <= eps).unwrap_or(false),
                _ => false,
            };
            CheckEntry::outcome(format!("iii/pair {i}"), realized == grounded).with_detail(format!(
                "realizations {}, grounded doubles {}",
                if realized { "equal" } else { "differ" },
                if grounded { "equal" } else { "differ" }
            ))
        })
        .collect();
    let equal_pairs = doubled
        .iter()
        .filter(|e| e.detail.as_deref().is_some_and(|d| d.starts_with("realizations equal")))
        .count();
    report.entries.extend(doubled);
    report.note(format!(
        "doubled equality checked on {} sampled pairs ({} with equal realizations)",
        samples.pairs.len(),
        equal_pairs
    ));

    let purified: Vec<CheckEntry> = samples
        .superoperators
        .par_iter()
        .enumerate()
        .map(|(i, s)| match s.purify(tol) {
            Ok(w) => {
                let residual = w
                    .grounded_double(&family.discard(w.ancilla_dim()))
                    .and_then(|m| Ok(m.max_residual(s.matrix())?))
                    .unwrap_or(f64::INFINITY);
                CheckEntry::residual(format!("iv/purify {i}"), residual, tol.roundtrip_eps)
            }
            Err(e) => CheckEntry::outcome(format!("iv/purify {i}"), false).with_detail(e.to_string()),
        })
        .collect();
    report.entries.extend(purified);
    report.note(format!(
        "purification checked on {} sampled maps; dims {:?} for clauses i and ii",
        samples.superoperators.len(),
        dims
    ));
    report
}
