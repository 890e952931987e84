//! The CP* construction: completely positive maps between Frobenius
//! structures.
//!
//! A morphism `(A, m_A) -> (B, m_B)` is a carrier-level matrix of the form
//! `frob_B ∘ realize(w) ∘ frob_A†` for some Kraus witness `w`, where `frob`
//! is the multiplication of a structure with its first input bent around.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::category::Object;
use crate::cpm::{CpmError, CpmMorphism, Superoperator};
use crate::frobenius::{FrobeniusError, FrobeniusStructure};
use crate::report::{CheckEntry, CheckReport};
use crate::scalar::{RealField, Scalar};
use crate::tensor::{Matrix, TensorError};
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CpStarError {
    #[error("witness is {found_in} -> {found_out}, structures need {dom} -> {cod}")]
    WitnessBoundary {
        dom: usize,
        cod: usize,
        found_in: usize,
        found_out: usize,
    },
    #[error("map has shape {found:?}, structures need {expected:?}")]
    MapShape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("codomain of the first morphism is not the domain of the second")]
    Boundary,
    #[error("not a CP* morphism: {0}")]
    NotMember(MembershipFailure),
    #[error("closure check failed for {operation}: {failure}")]
    Closure {
        operation: &'static str,
        failure: MembershipFailure,
    },
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Cpm(#[from] CpmError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Which half of the membership test failed.
#[derive(Debug, Clone, PartialEq)]
pub enum MembershipFailure {
    /// The unsandwiched superoperator has a negative Choi eigenvalue (or a
    /// non-Hermitian Choi matrix, reported as `NaN`).
    NotCp { min_eigenvalue: f64 },
    /// Resandwiching does not give the map back.
    NotReproduced { residual: f64 },
}

impl std::fmt::Display for MembershipFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MembershipFailure::NotCp { min_eigenvalue } => {
                write!(f, "inner superoperator is not CP (Choi eigenvalue {min_eigenvalue})")
            }
            MembershipFailure::NotReproduced { residual } => {
                write!(f, "map is not reproduced by its sandwich (residual {residual:.3e})")
            }
        }
    }
}

/// `frob : A⊗A -> A` of a structure, `frob[r, (p, q)] = conj(m[p, (q, r)])`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobMap<S> {
    structure: FrobeniusStructure<S>,
    matrix: Matrix<S>,
}

impl<S: Scalar> FrobMap<S> {
    pub fn structure(&self) -> &FrobeniusStructure<S> {
        &self.structure
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn dagger(&self) -> Matrix<S> {
        self.matrix.dagger()
    }
}

/// `frob† ∘ frob` on the doubled carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoherenceIdempotent<S> {
    pub matrix: Matrix<S>,
}

fn frob_matrix<S: Scalar>(s: &FrobeniusStructure<S>) -> Matrix<S> {
    let d = s.dim();
    let m = s.mult();
    Matrix::from_fn(d, d * d, |r, col| m.get(col / d, (col % d) * d + r).conj())
}

fn require_frobenius<S: Scalar>(s: &FrobeniusStructure<S>, eps: f64) -> Result<(), FrobeniusError> {
    let report = s.check(eps)?;
    if report.passes() {
        Ok(())
    } else {
        Err(FrobeniusError::NotFrobenius(report))
    }
}

/// The frob map of a structure that passes the axioms at `eps`.
pub fn frob_map<S: Scalar>(s: &FrobeniusStructure<S>, eps: f64) -> Result<FrobMap<S>, FrobeniusError> {
    require_frobenius(s, eps)?;
    Ok(FrobMap {
        structure: s.clone(),
        matrix: frob_matrix(s),
    })
}

pub fn dagger_frob_map<S: Scalar>(s: &FrobeniusStructure<S>, eps: f64) -> Result<Matrix<S>, FrobeniusError> {
    Ok(frob_map(s, eps)?.dagger())
}

/// The comultiplication with its first output as ancilla, as a Kraus family
/// on the carrier: `K_x[b, a] = m†[(x, b), a]`.
pub fn grounded_comultiplication<S: Scalar>(s: &FrobeniusStructure<S>) -> CpmMorphism<S> {
    let d = s.dim();
    CpmMorphism::from_witness(d, d, &s.comult()).expect("comultiplication is d² x d")
}

/// `frob† ∘ frob`.
pub fn decoherence_idempotent<S: Scalar>(
    s: &FrobeniusStructure<S>,
    eps: f64,
) -> Result<DecoherenceIdempotent<S>, FrobeniusError> {
    let f = frob_map(s, eps)?;
    Ok(DecoherenceIdempotent {
        matrix: f.dagger().matmul(f.matrix())?,
    })
}

/// Residuals of the two splitting identities for a candidate frob matrix:
/// `frob ∘ frob† = 1` and `frob† ∘ frob = realize(grounded comultiplication)`,
/// plus idempotency of the latter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplittingResiduals {
    pub retraction: f64,
    pub grounded: f64,
    pub idempotent: f64,
}

pub fn splitting_residuals<S: Scalar>(
    s: &FrobeniusStructure<S>,
    frob: &Matrix<S>,
) -> Result<SplittingResiduals, TensorError> {
    let fd = frob.dagger();
    let e = fd.matmul(frob)?;
    let g = grounded_comultiplication(s).realize().into_matrix();
    Ok(SplittingResiduals {
        retraction: frob.matmul(&fd)?.identity_residual()?,
        grounded: e.max_residual(&g)?,
        idempotent: e.matmul(&e)?.max_residual(&e)?,
    })
}

/// Entrywise comparison of two structures on equal carriers.
pub fn same_structure<S: Scalar>(a: &FrobeniusStructure<S>, b: &FrobeniusStructure<S>, eps: f64) -> bool {
    a.carrier().same_wires(b.carrier())
        && a.mult().max_residual(b.mult()).is_ok_and(|r| r <= eps)
        && a.unit().max_residual(b.unit()).is_ok_and(|r| r <= eps)
}

/// A family of candidate frob matrices, one per structure.
pub trait FrobFamily: Sync {
    fn name(&self) -> &str;
    fn frob(&self, s: &FrobeniusStructure<Complex<f64>>) -> Matrix<Complex<f64>>;
}

/// The canonical frob.
#[derive(Clone, Copy, Debug, Default)]
pub struct CanonicalFrob;

impl FrobFamily for CanonicalFrob {
    fn name(&self) -> &str {
        "canonical"
    }

    fn frob(&self, s: &FrobeniusStructure<Complex<f64>>) -> Matrix<Complex<f64>> {
        frob_matrix(s)
    }
}

/// The canonical frob with the sign of the first nonzero entry of row 0
/// flipped.
#[derive(Clone, Copy, Debug, Default)]
pub struct SignFlippedFrob;

impl FrobFamily for SignFlippedFrob {
    fn name(&self) -> &str {
        "sign-flipped"
    }

    fn frob(&self, s: &FrobeniusStructure<Complex<f64>>) -> Matrix<Complex<f64>> {
        let mut f = frob_matrix(s);
        if let Some(col) = (0..f.cols()).find(|&c| f.get(0, c).norm() > 0.0) {
            f.set(0, col, -f.get(0, col));
        }
        f
    }
}

fn sandwich_with<T: RealField>(
    frob_dom: &Matrix<Complex<T>>,
    frob_cod: &Matrix<Complex<T>>,
    s: &Matrix<Complex<T>>,
) -> Result<Matrix<Complex<T>>, TensorError> {
    frob_cod.matmul(s)?.matmul(&frob_dom.dagger())
}

/// `frob_cod ∘ realize(w) ∘ frob_dom†`.
pub fn sandwich_realize<T: RealField>(
    w: &CpmMorphism<Complex<T>>,
    dom: &FrobeniusStructure<Complex<T>>,
    cod: &FrobeniusStructure<Complex<T>>,
    tol: &Tolerance,
) -> Result<Matrix<Complex<T>>, CpStarError> {
    if w.dim_in() != dom.dim() || w.dim_out() != cod.dim() {
        return Err(CpStarError::WitnessBoundary {
            dom: dom.dim(),
            cod: cod.dim(),
            found_in: w.dim_in(),
            found_out: w.dim_out(),
        });
    }
    let fa = frob_map(dom, tol.structural_eps)?;
    let fb = frob_map(cod, tol.structural_eps)?;
    Ok(sandwich_with(fa.matrix(), fb.matrix(), w.realize().matrix())?)
}

/// Result of the membership decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership<T> {
    /// `frob_cod† ∘ map ∘ frob_dom`.
    pub inner: Superoperator<Complex<T>>,
    pub min_eigenvalue: f64,
    pub reproduction_residual: f64,
    pub failure: Option<MembershipFailure>,
}

impl<T> Membership<T> {
    pub fn is_member(&self) -> bool {
        self.failure.is_none()
    }
}

fn membership_with<T: RealField>(
    map: &Matrix<Complex<T>>,
    frob_dom: &Matrix<Complex<T>>,
    frob_cod: &Matrix<Complex<T>>,
    tol: &Tolerance,
) -> Result<Membership<T>, CpStarError> {
    let (da, db) = (frob_dom.rows(), frob_cod.rows());
    if map.shape() != (db, da) {
        return Err(CpStarError::MapShape {
            expected: (db, da),
            found: map.shape(),
        });
    }
    let inner = frob_cod.dagger().matmul(map)?.matmul(frob_dom)?;
    let inner = Superoperator::new(da, db, inner)?;
    let decision = inner.choi().cp_decision(tol);
    let min_eigenvalue = decision.min_eigenvalue().unwrap_or(f64::NAN);
    let reproduction_residual = sandwich_with(frob_dom, frob_cod, inner.matrix())?.max_residual(map)?;
    let failure = if !decision.is_cp {
        Some(MembershipFailure::NotCp { min_eigenvalue })
    } else if reproduction_residual > tol.structural_eps {
        Some(MembershipFailure::NotReproduced {
            residual: reproduction_residual,
        })
    } else {
        None
    };
    Ok(Membership {
        inner,
        min_eigenvalue,
        reproduction_residual,
        failure,
    })
}

/// Full membership decision with the intermediate data.
pub fn cpstar_membership<T: RealField>(
    map: &Matrix<Complex<T>>,
    dom: &FrobeniusStructure<Complex<T>>,
    cod: &FrobeniusStructure<Complex<T>>,
    tol: &Tolerance,
) -> Result<Membership<T>, CpStarError> {
    let fa = frob_map(dom, tol.structural_eps)?;
    let fb = frob_map(cod, tol.structural_eps)?;
    membership_with(map, fa.matrix(), fb.matrix(), tol)
}

/// Whether `map` is a CP* morphism `dom -> cod`. Malformed input is `false`.
pub fn is_cpstar<T: RealField>(
    map: &Matrix<Complex<T>>,
    dom: &FrobeniusStructure<Complex<T>>,
    cod: &FrobeniusStructure<Complex<T>>,
    tol: &Tolerance,
) -> bool {
    cpstar_membership(map, dom, cod, tol).is_ok_and(|m| m.is_member())
}

/// A witness `w` with `sandwich_realize(w) ≈ map`.
pub fn cpstar_purify<T: RealField>(
    map: &Matrix<Complex<T>>,
    dom: &FrobeniusStructure<Complex<T>>,
    cod: &FrobeniusStructure<Complex<T>>,
    tol: &Tolerance,
) -> Result<CpmMorphism<Complex<T>>, CpStarError> {
    let m = cpstar_membership(map, dom, cod, tol)?;
    if let Some(failure) = m.failure {
        return Err(CpStarError::NotMember(failure));
    }
    Ok(m.inner.purify(tol)?)
}

/// The counit `u† : A -> I`, the trace of the regular representation.
pub fn trace_functional<S: Scalar>(s: &FrobeniusStructure<S>) -> Matrix<S> {
    s.counit()
}

/// A CP* morphism with a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct CpStarMorphism<T: RealField> {
    dom: FrobeniusStructure<Complex<T>>,
    cod: FrobeniusStructure<Complex<T>>,
    map: Matrix<Complex<T>>,
    witness: CpmMorphism<Complex<T>>,
}

impl<T: RealField> CpStarMorphism<T> {
    /// Accepts `map` if it is a member, and attaches a purified witness.
    pub fn new(
        dom: FrobeniusStructure<Complex<T>>,
        cod: FrobeniusStructure<Complex<T>>,
        map: Matrix<Complex<T>>,
        tol: &Tolerance,
    ) -> Result<Self, CpStarError> {
        let witness = cpstar_purify(&map, &dom, &cod, tol)?;
        Ok(CpStarMorphism { dom, cod, map, witness })
    }

    /// The sandwich of `witness`.
    pub fn from_witness(
        dom: FrobeniusStructure<Complex<T>>,
        cod: FrobeniusStructure<Complex<T>>,
        witness: CpmMorphism<Complex<T>>,
        tol: &Tolerance,
    ) -> Result<Self, CpStarError> {
        let map = sandwich_realize(&witness, &dom, &cod, tol)?;
        Ok(CpStarMorphism { dom, cod, map, witness })
    }

    /// Checks a caller-supplied witness against the map.
    pub fn with_witness(
        dom: FrobeniusStructure<Complex<T>>,
        cod: FrobeniusStructure<Complex<T>>,
        map: Matrix<Complex<T>>,
        witness: CpmMorphism<Complex<T>>,
        tol: &Tolerance,
    ) -> Result<Self, CpStarError> {
        let realized = sandwich_realize(&witness, &dom, &cod, tol)?;
        let residual = realized.max_residual(&map).map_err(|_| CpStarError::MapShape {
            expected: realized.shape(),
            found: map.shape(),
        })?;
        if residual > tol.structural_eps {
            return Err(CpStarError::NotMember(MembershipFailure::NotReproduced { residual }));
        }
        Ok(CpStarMorphism { dom, cod, map, witness })
    }

    pub fn identity(s: FrobeniusStructure<Complex<T>>, tol: &Tolerance) -> Result<Self, CpStarError> {
        let d = s.dim();
        CpStarMorphism::from_witness(s.clone(), s, CpmMorphism::identity(d), tol)
    }

    pub fn dom(&self) -> &FrobeniusStructure<Complex<T>> {
        &self.dom
    }

    pub fn cod(&self) -> &FrobeniusStructure<Complex<T>> {
        &self.cod
    }

    pub fn map(&self) -> &Matrix<Complex<T>> {
        &self.map
    }

    pub fn witness(&self) -> &CpmMorphism<Complex<T>> {
        &self.witness
    }

    fn closed(
        operation: &'static str,
        dom: FrobeniusStructure<Complex<T>>,
        cod: FrobeniusStructure<Complex<T>>,
        map: Matrix<Complex<T>>,
        tol: &Tolerance,
    ) -> Result<Self, CpStarError> {
        match CpStarMorphism::new(dom, cod, map, tol) {
            Err(CpStarError::NotMember(failure)) => Err(CpStarError::Closure { operation, failure }),
            other => other,
        }
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &CpStarMorphism<T>, tol: &Tolerance) -> Result<Self, CpStarError> {
        if !same_structure(&f.cod, &self.dom, tol.structural_eps) {
            return Err(CpStarError::Boundary);
        }
        let map = self.map.matmul(&f.map)?;
        CpStarMorphism::closed("compose", f.dom.clone(), self.cod.clone(), map, tol)
    }

    /// Maps are kroneckered; the structures become tensor structures.
    pub fn tensor(&self, other: &CpStarMorphism<T>, tol: &Tolerance) -> Result<Self, CpStarError> {
        let dom = self.dom.tensor_structure(&other.dom)?;
        let cod = self.cod.tensor_structure(&other.cod)?;
        CpStarMorphism::closed("tensor", dom, cod, self.map.kron(&other.map), tol)
    }

    pub fn dagger(&self, tol: &Tolerance) -> Result<Self, CpStarError> {
        CpStarMorphism::closed("dagger", self.cod.clone(), self.dom.clone(), self.map.dagger(), tol)
    }
}

pub fn cpstar_compose<T: RealField>(
    g: &CpStarMorphism<T>,
    f: &CpStarMorphism<T>,
    tol: &Tolerance,
) -> Result<CpStarMorphism<T>, CpStarError> {
    g.compose(f, tol)
}

pub fn cpstar_tensor<T: RealField>(
    f: &CpStarMorphism<T>,
    g: &CpStarMorphism<T>,
    tol: &Tolerance,
) -> Result<CpStarMorphism<T>, CpStarError> {
    f.tensor(g, tol)
}

pub fn cpstar_dagger<T: RealField>(f: &CpStarMorphism<T>, tol: &Tolerance) -> Result<CpStarMorphism<T>, CpStarError> {
    f.dagger(tol)
}

/// `Q(f) = f ⊗ conj f` between the matrix algebras on `dom f` and `cod f`.
pub fn functor_q<T: RealField>(f: &Matrix<Complex<T>>, tol: &Tolerance) -> Result<CpStarMorphism<T>, CpStarError> {
    let dom = FrobeniusStructure::pants(f.cols())?;
    let cod = FrobeniusStructure::pants(f.rows())?;
    let map = f.kron(&f.conj());
    CpStarMorphism::new(dom, cod, map, tol)
}

/// Regroups a map between `pants(a) ⊗ pants(b)` carriers `(a, a', b, b')`
/// into `pants(ab)` order `(a, b, a', b')`.
pub fn pants_tensor_regroup<S: Scalar>(
    map: &Matrix<S>,
    (a_in, b_in): (usize, usize),
    (a_out, b_out): (usize, usize),
) -> Result<Matrix<S>, TensorError> {
    map.permute_factors(
        &[a_out, a_out, b_out, b_out],
        &[a_in, a_in, b_in, b_in],
        &[0, 2, 1, 3],
        &[0, 2, 1, 3],
    )
}

/// A CP* sample for [`check_decoherence`]: a witness between two of the
/// listed structures.
#[derive(Clone, Debug)]
pub struct DecoherenceSample {
    pub dom: usize,
    pub cod: usize,
    pub witness: CpmMorphism<Complex<f64>>,
}

/// `n` random witnesses between random pairs of `structures`.
pub fn decoherence_samples(
    structures: &[FrobeniusStructure<Complex<f64>>],
    seed: u64,
    n: usize,
) -> Vec<DecoherenceSample> {
    if structures.is_empty() {
        return Vec::new();
    }
    let mut rng = crate::sampling::seeded(seed);
    (0..n)
        .map(|_| {
            let dom = rng.random_range(0..structures.len());
            let cod = rng.random_range(0..structures.len());
            let ancilla = rng.random_range(1..=3);
            let witness = crate::sampling::random_cpm(&mut rng, structures[dom].dim(), structures[cod].dim(), ancilla);
            DecoherenceSample { dom, cod, witness }
        })
        .collect()
}

/// Checks the decoherence-structure equations for a frob family.
///
/// Entry prefixes: `i/` monoidal compatibility, `ii/` splitting
/// identities, `iii/` purification round trips, `iv/` spider step.
pub fn check_decoherence(
    family: &dyn FrobFamily,
    structures: &[FrobeniusStructure<Complex<f64>>],
    samples: &[DecoherenceSample],
    tol: &Tolerance,
) -> CheckReport {
    let eps = tol.structural_eps;
    let mut report = CheckReport::new();
    if structures.is_empty() {
        return report;
    }
    let bad = |e: TensorError| e.to_string();

    let trivial = FrobeniusStructure::<Complex<f64>>::trivial();
    report.push(CheckEntry::residual(
        "i/trivial",
        family
            .frob(&trivial)
            .max_residual(&Matrix::identity(1))
            .unwrap_or(f64::INFINITY),
        eps,
    ));
    for (i, a) in structures.iter().enumerate() {
        for (j, b) in structures.iter().enumerate() {
            let name = format!("i/tensor {i}x{j}");
            let entry = match a.tensor_structure(b) {
                Ok(ab) => {
                    let (da, db) = (a.dim(), b.dim());
                    let split = family
                        .frob(a)
                        .kron(&family.frob(b))
                        .permute_factors(&[da * db], &[da, da, db, db], &[0], &[0, 2, 1, 3])
                        .and_then(|s| family.frob(&ab).max_residual(&s));
                    match split {
                        Ok(r) => CheckEntry::residual(name, r, eps),
                        Err(e) => CheckEntry::outcome(name, false).with_detail(bad(e)),
                    }
                }
                Err(e) => CheckEntry::outcome(name, false).with_detail(e.to_string()),
            };
            report.push(entry);
        }
    }

    for (i, s) in structures.iter().enumerate() {
        match splitting_residuals(s, &family.frob(s)) {
            Ok(r) => {
                report.push(CheckEntry::residual(format!("ii/retraction {i}"), r.retraction, eps));
                report.push(CheckEntry::residual(format!("ii/grounded {i}"), r.grounded, eps));
                report.push(CheckEntry::residual(format!("ii/idempotent {i}"), r.idempotent, eps));
            }
            Err(e) => report.push(CheckEntry::outcome(format!("ii/{i}"), false).with_detail(bad(e))),
        }
    }

    let round_trips: Vec<CheckEntry> = samples
        .par_iter()
        .enumerate()
        .map(|(k, sample)| {
            let name = format!("iii/sample {k}");
            let (Some(dom), Some(cod)) = (structures.get(sample.dom), structures.get(sample.cod)) else {
                return CheckEntry::outcome(name, false).with_detail("structure index out of range");
            };
            let (fa, fb) = (family.frob(dom), family.frob(cod));
            let result = sandwich_with(&fa, &fb, sample.witness.realize().matrix())
                .map_err(CpStarError::from)
                .and_then(|map| {
                    let m = membership_with(&map, &fa, &fb, tol)?;
                    if let Some(failure) = m.failure {
                        return Err(CpStarError::NotMember(failure));
                    }
                    let w = m.inner.purify(tol)?;
                    Ok(sandwich_with(&fa, &fb, w.realize().matrix())?.max_residual(&map)?)
                });
            match result {
                Ok(r) => CheckEntry::residual(name, r, tol.roundtrip_eps),
                Err(e) => CheckEntry::outcome(name, false).with_detail(e.to_string()),
            }
        })
        .collect();
    report.entries.extend(round_trips);
    report.note(format!(
        "purification round trip checked on {} sampled witnesses over {} structures",
        samples.len(),
        structures.len()
    ));

    for (i, s) in structures.iter().enumerate() {
        // m ∘ (1 ⊗ m) ∘ (1 ⊗ m†) ∘ m† collapses to m ∘ m† = 1
        let d = s.dim();
        let id = Matrix::identity(d);
        let m = s.mult();
        let md = s.comult();
        let step = m
            .matmul(&id.kron(m))
            .and_then(|x| x.matmul(&id.kron(&md)))
            .and_then(|x| x.matmul(&md))
            .and_then(|x| x.identity_residual());
        match step {
            Ok(r) => report.push(CheckEntry::residual(format!("iv/spider {i}"), r, eps)),
            Err(e) => report.push(CheckEntry::outcome(format!("iv/spider {i}"), false).with_detail(bad(e))),
        }
    }
    report
}

/// Carrier object of the matrix algebra on `A`.
pub fn doubled_object(d: usize) -> Object {
    if d == 1 {
        Object::unit()
    } else {
        Object::new(vec![d, d]).expect("positive factors")
    }
}
