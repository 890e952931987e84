//! Executable consequences of the two axiomatization theorems.
//!
//! Each construction has two concrete presentations: one that stores Kraus
//! witnesses and one that stores the realized maps. The mediating functor
//! between any two presentations decomposes a morphism into a discarded
//! doubled witness and rebuilds it on the other side. Its functor laws and
//! well-definedness are checked on seeded samples.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cpm::{cpm_equal, discard, CpmError, CpmMorphism, Superoperator};
use crate::cpstar::{
    cpstar_purify, grounded_comultiplication, pants_tensor_regroup, sandwich_realize, trace_functional, CpStarError,
    CpStarMorphism,
};
use crate::frobenius::FrobeniusStructure;
use crate::report::{CheckEntry, CheckReport};
use crate::sampling::{ancilla_rotated, random_cpm, random_matrix, seeded};
use crate::tensor::{Matrix, TensorError};
use crate::tolerance::Tolerance;

type C = Complex64;
type Structure = FrobeniusStructure<C>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TheoremError {
    #[error(transparent)]
    Cpm(#[from] CpmError),
    #[error(transparent)]
    CpStar(#[from] CpStarError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Which construction to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cpm,
    CpStar,
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cpm" => Ok(Kind::Cpm),
            "cpstar" => Ok(Kind::CpStar),
            other => Err(format!("unknown kind `{other}`, expected cpm or cpstar")),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Cpm => "cpm",
            Kind::CpStar => "cpstar",
        })
    }
}

/// A concrete category with discarding and purification.
pub trait Presentation: Sync {
    type Object: Clone + Send + Sync;
    type Morphism: Clone + Send + Sync;

    fn tag(&self) -> &'static str;
    fn identity(&self, a: &Self::Object) -> Result<Self::Morphism, TheoremError>;
    /// `g ∘ f`.
    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError>;
    fn tensor(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, TheoremError>;
    fn dagger(&self, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError>;
    /// The discard map on `a`.
    fn discard(&self, a: &Self::Object) -> Result<Self::Morphism, TheoremError>;
    /// Discard the ancilla of the doubled witness.
    fn from_witness(
        &self,
        dom: &Self::Object,
        cod: &Self::Object,
        w: &CpmMorphism<C>,
    ) -> Result<Self::Morphism, TheoremError>;
    /// Purification: boundary objects and a witness.
    fn decompose(&self, m: &Self::Morphism) -> Result<(Self::Object, Self::Object, CpmMorphism<C>), TheoremError>;
    /// The matrix compared under canonical equality.
    fn realization(&self, m: &Self::Morphism) -> Result<Matrix<C>, TheoremError>;

    fn residual(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<f64, TheoremError> {
        Ok(self.realization(f)?.max_residual(&self.realization(g)?)?)
    }
}

/// CPM with stored Kraus witnesses.
#[derive(Clone, Copy, Debug, Default)]
pub struct CpmWitnessForm;

/// CPM as superoperators.
#[derive(Clone, Copy, Debug)]
pub struct CpmSuperoperatorForm {
    pub tol: Tolerance,
}

impl Presentation for CpmWitnessForm {
    type Object = usize;
    type Morphism = CpmMorphism<C>;

    fn tag(&self) -> &'static str {
        "witness"
    }

    fn identity(&self, a: &usize) -> Result<Self::Morphism, TheoremError> {
        Ok(CpmMorphism::identity(*a))
    }

    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(g.compose(f)?)
    }

    fn tensor(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(f.tensor(g))
    }

    fn dagger(&self, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(f.dagger())
    }

    fn discard(&self, a: &usize) -> Result<Self::Morphism, TheoremError> {
        let covectors = (0..*a).map(|i| Matrix::<C>::basis(*a, i).transpose()).collect();
        Ok(CpmMorphism::new(*a, 1, covectors)?)
    }

    fn from_witness(&self, _: &usize, _: &usize, w: &CpmMorphism<C>) -> Result<Self::Morphism, TheoremError> {
        Ok(w.clone())
    }

    fn decompose(&self, m: &Self::Morphism) -> Result<(usize, usize, CpmMorphism<C>), TheoremError> {
        Ok((m.dim_in(), m.dim_out(), m.clone()))
    }

    fn realization(&self, m: &Self::Morphism) -> Result<Matrix<C>, TheoremError> {
        Ok(m.realize().into_matrix())
    }
}

impl Presentation for CpmSuperoperatorForm {
    type Object = usize;
    type Morphism = Superoperator<C>;

    fn tag(&self) -> &'static str {
        "superoperator"
    }

    fn identity(&self, a: &usize) -> Result<Self::Morphism, TheoremError> {
        Ok(Superoperator::identity(*a))
    }

    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(g.compose(f)?)
    }

    fn tensor(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(f.tensor(g))
    }

    fn dagger(&self, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(f.dagger())
    }

    fn discard(&self, a: &usize) -> Result<Self::Morphism, TheoremError> {
        Ok(discard(*a))
    }

    fn from_witness(&self, _: &usize, _: &usize, w: &CpmMorphism<C>) -> Result<Self::Morphism, TheoremError> {
        Ok(w.realize())
    }

    fn decompose(&self, m: &Self::Morphism) -> Result<(usize, usize, CpmMorphism<C>), TheoremError> {
        Ok((m.dim_in(), m.dim_out(), m.purify(&self.tol)?))
    }

    fn realization(&self, m: &Self::Morphism) -> Result<Matrix<C>, TheoremError> {
        Ok(m.matrix().clone())
    }
}

/// A CP* morphism held as its witness.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessedMap {
    pub dom: Structure,
    pub cod: Structure,
    pub witness: CpmMorphism<C>,
}

/// CP* with stored witnesses; composition inserts the grounded
/// comultiplication of the middle structure between the two witnesses.
#[derive(Clone, Copy, Debug)]
pub struct CpStarWitnessForm {
    pub tol: Tolerance,
}

/// CP* as realized maps, recomputing witnesses by purification.
#[derive(Clone, Copy, Debug)]
pub struct CpStarRealizedForm {
    pub tol: Tolerance,
}

impl Presentation for CpStarWitnessForm {
    type Object = Structure;
    type Morphism = WitnessedMap;

    fn tag(&self) -> &'static str {
        "witness"
    }

    fn identity(&self, a: &Structure) -> Result<Self::Morphism, TheoremError> {
        Ok(WitnessedMap {
            dom: a.clone(),
            cod: a.clone(),
            witness: CpmMorphism::identity(a.dim()),
        })
    }

    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        if !crate::cpstar::same_structure(&f.cod, &g.dom, self.tol.structural_eps) {
            return Err(CpStarError::Boundary.into());
        }
        let middle = grounded_comultiplication(&f.cod);
        Ok(WitnessedMap {
            dom: f.dom.clone(),
            cod: g.cod.clone(),
            witness: g.witness.compose(&middle.compose(&f.witness)?)?,
        })
    }

    fn tensor(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(WitnessedMap {
            dom: f.dom.tensor_structure(&g.dom).map_err(CpStarError::from)?,
            cod: f.cod.tensor_structure(&g.cod).map_err(CpStarError::from)?,
            witness: f.witness.tensor(&g.witness),
        })
    }

    fn dagger(&self, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(WitnessedMap {
            dom: f.cod.clone(),
            cod: f.dom.clone(),
            witness: f.witness.dagger(),
        })
    }

    fn discard(&self, a: &Structure) -> Result<Self::Morphism, TheoremError> {
        let trivial = Structure::trivial();
        let witness = cpstar_purify(&trace_functional(a), a, &trivial, &self.tol)?;
        Ok(WitnessedMap {
            dom: a.clone(),
            cod: trivial,
            witness,
        })
    }

    fn from_witness(
        &self,
        dom: &Structure,
        cod: &Structure,
        w: &CpmMorphism<C>,
    ) -> Result<Self::Morphism, TheoremError> {
        Ok(WitnessedMap {
            dom: dom.clone(),
            cod: cod.clone(),
            witness: w.clone(),
        })
    }

    fn decompose(&self, m: &Self::Morphism) -> Result<(Structure, Structure, CpmMorphism<C>), TheoremError> {
        Ok((m.dom.clone(), m.cod.clone(), m.witness.clone()))
    }

    fn realization(&self, m: &Self::Morphism) -> Result<Matrix<C>, TheoremError> {
        Ok(sandwich_realize(&m.witness, &m.dom, &m.cod, &self.tol)?)
    }
}

impl Presentation for CpStarRealizedForm {
    type Object = Structure;
    type Morphism = CpStarMorphism<f64>;

    fn tag(&self) -> &'static str {
        "realized"
    }

    fn identity(&self, a: &Structure) -> Result<Self::Morphism, TheoremError> {
        Ok(CpStarMorphism::new(
            a.clone(),
            a.clone(),
            Matrix::identity(a.dim()),
            &self.tol,
        )?)
    }

    fn compose(&self, g: &Self::Morphism, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(g.compose(f, &self.tol)?)
    }

    fn tensor(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(f.tensor(g, &self.tol)?)
    }

    fn dagger(&self, f: &Self::Morphism) -> Result<Self::Morphism, TheoremError> {
        Ok(f.dagger(&self.tol)?)
    }

    fn discard(&self, a: &Structure) -> Result<Self::Morphism, TheoremError> {
        Ok(CpStarMorphism::new(
            a.clone(),
            Structure::trivial(),
            trace_functional(a),
            &self.tol,
        )?)
    }

    fn from_witness(
        &self,
        dom: &Structure,
        cod: &Structure,
        w: &CpmMorphism<C>,
    ) -> Result<Self::Morphism, TheoremError> {
        let map = sandwich_realize(w, dom, cod, &self.tol)?;
        Ok(CpStarMorphism::new(dom.clone(), cod.clone(), map, &self.tol)?)
    }

    fn decompose(&self, m: &Self::Morphism) -> Result<(Structure, Structure, CpmMorphism<C>), TheoremError> {
        let w = cpstar_purify(m.map(), m.dom(), m.cod(), &self.tol)?;
        Ok((m.dom().clone(), m.cod().clone(), w))
    }

    fn realization(&self, m: &Self::Morphism) -> Result<Matrix<C>, TheoremError> {
        Ok(m.map().clone())
    }
}

/// `F(m) = dst.from_witness(src.decompose(m))`.
pub fn mediate<P: Presentation, Q: Presentation<Object = P::Object>>(
    src: &P,
    dst: &Q,
    m: &P::Morphism,
) -> Result<Q::Morphism, TheoremError> {
    let (dom, cod, w) = src.decompose(m)?;
    dst.from_witness(&dom, &cod, &w)
}

pub fn mediating_cpm<P, Q>(src: &P, dst: &Q, m: &P::Morphism) -> Result<Q::Morphism, TheoremError>
where
    P: Presentation<Object = usize>,
    Q: Presentation<Object = usize>,
{
    mediate(src, dst, m)
}

pub fn mediating_cpstar<P, Q>(src: &P, dst: &Q, m: &P::Morphism) -> Result<Q::Morphism, TheoremError>
where
    P: Presentation<Object = Structure>,
    Q: Presentation<Object = Structure>,
{
    mediate(src, dst, m)
}

/// The laws reported by [`verify_functor_laws`].
pub const LAWS: [&str; 7] = [
    "identity",
    "compose",
    "tensor",
    "dagger",
    "well_defined",
    "pure",
    "discard",
];

/// One seeded sample: composable witnesses `f : a -> b`, `g : b -> c`, an
/// ancilla-rotated copy of `f`, and a pure map `a -> b`.
#[derive(Clone, Debug)]
struct Sample<O> {
    a: O,
    b: O,
    c: O,
    f: CpmMorphism<C>,
    f_rotated: CpmMorphism<C>,
    g: CpmMorphism<C>,
    pure_dom: O,
    pure_cod: O,
    pure: CpmMorphism<C>,
}

fn cpm_samples(seed: u64, n: usize) -> Vec<Sample<usize>> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| {
            let (a, b, c) = (
                rng.random_range(1..=3),
                rng.random_range(1..=3),
                rng.random_range(1..=3),
            );
            let (xf, xg) = (rng.random_range(1..=3), rng.random_range(1..=3));
            let f = random_cpm(&mut rng, a, b, xf);
            let g = random_cpm(&mut rng, b, c, xg);
            let extra = rng.random_range(0..=2);
            let f_rotated = ancilla_rotated(&mut rng, &f, f.ancilla_dim() + extra);
            let pure = CpmMorphism::pure(&random_matrix(&mut rng, b, a));
            Sample {
                a,
                b,
                c,
                f,
                f_rotated,
                g,
                pure_dom: a,
                pure_cod: b,
                pure,
            }
        })
        .collect()
}

/// Structures drawn for CP* samples.
pub fn cpstar_sample_structures() -> Vec<Structure> {
    vec![
        Structure::classical(2).expect("positive dimension"),
        Structure::pants(2).expect("positive dimension"),
    ]
}

fn cpstar_samples(seed: u64, n: usize) -> Vec<Sample<Structure>> {
    let pool = cpstar_sample_structures();
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| {
            let mut pick = || pool[rng.random_range(0..pool.len())].clone();
            let (a, b, c) = (pick(), pick(), pick());
            let (xf, xg) = (rng.random_range(1..=3), rng.random_range(1..=3));
            let f = random_cpm(&mut rng, a.dim(), b.dim(), xf);
            let g = random_cpm(&mut rng, b.dim(), c.dim(), xg);
            let extra = rng.random_range(0..=2);
            let f_rotated = ancilla_rotated(&mut rng, &f, f.ancilla_dim() + extra);
            // a pure map between the carriers of two matrix algebras
            let (pa, pb) = (rng.random_range(1..=2), rng.random_range(1..=2));
            let pure = CpmMorphism::pure(&random_matrix(&mut rng, pb * pb, pa * pa));
            Sample {
                a,
                b,
                c,
                f,
                f_rotated,
                g,
                pure_dom: Structure::pants(pa).expect("positive dimension"),
                pure_cod: Structure::pants(pb).expect("positive dimension"),
                pure,
            }
        })
        .collect()
}

fn law_residuals<P, Q>(src: &P, dst: &Q, s: &Sample<P::Object>) -> Result<[f64; 7], TheoremError>
where
    P: Presentation,
    Q: Presentation<Object = P::Object>,
{
    let f = src.from_witness(&s.a, &s.b, &s.f)?;
    let g = src.from_witness(&s.b, &s.c, &s.g)?;
    let ff = mediate(src, dst, &f)?;
    let fg = mediate(src, dst, &g)?;

    let identity = dst.residual(&mediate(src, dst, &src.identity(&s.a)?)?, &dst.identity(&s.a)?)?;
    let compose = dst.residual(&mediate(src, dst, &src.compose(&g, &f)?)?, &dst.compose(&fg, &ff)?)?;
    let tensor = dst.residual(&mediate(src, dst, &src.tensor(&f, &g)?)?, &dst.tensor(&ff, &fg)?)?;
    let dagger = dst.residual(&mediate(src, dst, &src.dagger(&f)?)?, &dst.dagger(&ff)?)?;
    let rotated = src.from_witness(&s.a, &s.b, &s.f_rotated)?;
    let well_defined = dst.residual(&mediate(src, dst, &rotated)?, &ff)?;
    let pure_src = src.from_witness(&s.pure_dom, &s.pure_cod, &s.pure)?;
    let pure = dst.residual(
        &mediate(src, dst, &pure_src)?,
        &dst.from_witness(&s.pure_dom, &s.pure_cod, &s.pure)?,
    )?;
    let discard = dst.residual(&mediate(src, dst, &src.discard(&s.a)?)?, &dst.discard(&s.a)?)?;
    Ok([identity, compose, tensor, dagger, well_defined, pure, discard])
}

fn law_report<P, Q>(src: &P, dst: &Q, samples: &[Sample<P::Object>], eps: f64) -> CheckReport
where
    P: Presentation,
    Q: Presentation<Object = P::Object>,
    P::Object: fmt::Debug,
{
    let mut report = CheckReport::new();
    if samples.is_empty() {
        return report;
    }
    let results: Vec<Result<[f64; 7], TheoremError>> = samples.par_iter().map(|s| law_residuals(src, dst, s)).collect();
    let direction = format!("{}->{}", src.tag(), dst.tag());
    let mut worst = [0.0f64; 7];
    let mut violations = [0usize; 7];
    let mut errors = Vec::new();
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(values) => {
                for (k, v) in values.iter().enumerate() {
                    worst[k] = worst[k].max(*v);
                    if !(*v <= eps) {
                        violations[k] += 1;
                    }
                }
            }
            Err(e) => errors.push(format!("sample {i}: {e}")),
        }
    }
    for (k, law) in LAWS.iter().enumerate() {
        let entry = CheckEntry::residual(format!("{direction}/{law}"), worst[k], eps);
        report.push(if violations[k] > 0 {
            entry.with_detail(format!("{} violations", violations[k]))
        } else {
            entry
        });
    }
    if !errors.is_empty() {
        report.push(CheckEntry::outcome(format!("{direction}/errors"), false).with_detail(errors.join("; ")));
    }
    report.note(format!("{direction}: {} samples", samples.len()));
    report
}

/// Functor laws of the mediating functors in both directions between the
/// two presentations of `kind`.
pub fn verify_functor_laws(kind: Kind, seed: u64, n_samples: usize, tol: &Tolerance) -> CheckReport {
    let eps = tol.structural_eps;
    let mut report = CheckReport::new();
    match kind {
        Kind::Cpm => {
            let samples = cpm_samples(seed, n_samples);
            let (w, s) = (CpmWitnessForm, CpmSuperoperatorForm { tol: *tol });
            report.extend(law_report(&w, &s, &samples, eps));
            report.extend(law_report(&s, &w, &samples, eps));
        }
        Kind::CpStar => {
            let samples = cpstar_samples(seed, n_samples);
            let (w, r) = (CpStarWitnessForm { tol: *tol }, CpStarRealizedForm { tol: *tol });
            report.extend(law_report(&w, &r, &samples, eps));
            report.extend(law_report(&r, &w, &samples, eps));
        }
    }
    report
}

fn round_trip<P, Q>(p: &P, q: &Q, m: &P::Morphism) -> Result<f64, TheoremError>
where
    P: Presentation,
    Q: Presentation<Object = P::Object>,
{
    let there = mediate(p, q, m)?;
    let back = mediate(q, p, &there)?;
    p.residual(&back, m)
}

fn round_trip_report<P, Q>(p: &P, q: &Q, morphisms: &[P::Morphism], eps: f64) -> CheckReport
where
    P: Presentation,
    Q: Presentation<Object = P::Object>,
{
    let mut report = CheckReport::new();
    let name = format!("{}->{}->{}", p.tag(), q.tag(), p.tag());
    let results: Vec<_> = morphisms.par_iter().map(|m| round_trip(p, q, m)).collect();
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => worst = worst.max(v),
            Err(e) => errors.push(format!("sample {i}: {e}")),
        }
    }
    if !morphisms.is_empty() {
        report.push(CheckEntry::residual(name.clone(), worst, eps));
    }
    if !errors.is_empty() {
        report.push(CheckEntry::outcome(format!("{name}/errors"), false).with_detail(errors.join("; ")));
    }
    report.note(format!("{name}: {} samples", morphisms.len()));
    report
}

/// Round trips through both mediating functors; the composite must be the
/// identity up to canonical equality within `roundtrip_eps`.
pub fn corollary_isomorphism_check(kind: Kind, seed: u64, n: usize, tol: &Tolerance) -> CheckReport {
    let eps = tol.roundtrip_eps;
    let mut report = CheckReport::new();
    match kind {
        Kind::Cpm => {
            let samples = cpm_samples(seed, n);
            let (w, s) = (CpmWitnessForm, CpmSuperoperatorForm { tol: *tol });
            let witnesses: Vec<_> = samples.iter().map(|x| x.f.clone()).collect();
            let supers: Vec<_> = samples.iter().map(|x| x.g.realize()).collect();
            report.extend(round_trip_report(&w, &s, &witnesses, eps));
            report.extend(round_trip_report(&s, &w, &supers, eps));
        }
        Kind::CpStar => {
            let samples = cpstar_samples(seed, n);
            let (w, r) = (CpStarWitnessForm { tol: *tol }, CpStarRealizedForm { tol: *tol });
            let witnessed: Vec<_> = samples
                .iter()
                .map(|x| WitnessedMap {
                    dom: x.a.clone(),
                    cod: x.b.clone(),
                    witness: x.f.clone(),
                })
                .collect();
            let realized: Vec<_> = samples
                .iter()
                .filter_map(|x| r.from_witness(&x.b, &x.c, &x.g).ok())
                .collect();
            report.extend(round_trip_report(&w, &r, &witnessed, eps));
            report.extend(round_trip_report(&r, &w, &realized, eps));
        }
    }
    report
}

/// `Q(f ⊗ g)` against the regrouped `Q(f) ⊗ Q(g)`; exposed for the CLI and
/// tests of the doubling functor.
pub fn doubled_tensor_residual(f: &Matrix<C>, g: &Matrix<C>, tol: &Tolerance) -> Result<f64, TheoremError> {
    let qf = crate::cpstar::functor_q(f, tol)?;
    let qg = crate::cpstar::functor_q(g, tol)?;
    let joint = crate::cpstar::functor_q(&f.kron(g), tol)?;
    let tensor = qf.tensor(&qg, tol)?;
    let regrouped = pants_tensor_regroup(tensor.map(), (f.cols(), g.cols()), (f.rows(), g.rows()))?;
    Ok(joint.map().max_residual(&regrouped)?)
}

/// Witnesses related by an ancilla isometry have equal images.
pub fn well_defined_on(w1: &CpmMorphism<C>, w2: &CpmMorphism<C>, tol: &Tolerance) -> Result<bool, TheoremError> {
    let s = CpmSuperoperatorForm { tol: *tol };
    let a = mediating_cpm(&CpmWitnessForm, &s, w1)?;
    let b = mediating_cpm(&CpmWitnessForm, &s, w2)?;
    Ok(cpm_equal(w1, w2, tol.structural_eps)? == a.approx_eq(&b, tol.structural_eps)?)
}
