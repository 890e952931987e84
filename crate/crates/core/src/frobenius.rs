//! Special dagger Frobenius structures and their axiom checker.
//!
//! A structure stores only its multiplication `A⊗A -> A` and unit `I -> A`;
//! the comultiplication and counit are always the daggers of those, so the
//! "dagger" part of the axioms holds by construction. Structures are never
//! rescaled: an input that fails an axiom is reported, not repaired.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::category::{CategoryError, Morphism, Object};
use crate::scalar::{Bit, RealField, Scalar};
use crate::tensor::{Matrix, TensorError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrobeniusError {
    #[error("multiplication must be {dim}x{expected_cols}, got {shape:?}")]
    MultShape {
        dim: usize,
        expected_cols: usize,
        shape: (usize, usize),
    },
    #[error("unit must be {dim}x1, got {shape:?}")]
    UnitShape { dim: usize, shape: (usize, usize) },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("malformed composition table: {0}")]
    MalformedTable(String),
    #[error("structure fails the Frobenius axioms: {0}")]
    NotFrobenius(AxiomReport),
    #[error(transparent)]
    Category(#[from] CategoryError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// The equations checked by [`FrobeniusStructure::check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// `m ∘ (m ⊗ 1) = m ∘ (1 ⊗ m)`
    Associativity,
    /// `m ∘ (u ⊗ 1) = 1`
    LeftUnit,
    /// `m ∘ (1 ⊗ u) = 1`
    RightUnit,
    /// `m ∘ m† = 1`
    Specialty,
    /// `(1 ⊗ m) ∘ (m† ⊗ 1) = m† ∘ m`
    FrobeniusLeft,
    /// `(m ⊗ 1) ∘ (1 ⊗ m†) = m† ∘ m`
    FrobeniusRight,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::Associativity,
        Axiom::LeftUnit,
        Axiom::RightUnit,
        Axiom::Specialty,
        Axiom::FrobeniusLeft,
        Axiom::FrobeniusRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Associativity => "associativity",
            Axiom::LeftUnit => "left_unit",
            Axiom::RightUnit => "right_unit",
            Axiom::Specialty => "specialty",
            Axiom::FrobeniusLeft => "frobenius_left",
            Axiom::FrobeniusRight => "frobenius_right",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomResidual {
    pub axiom: Axiom,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub eps: f64,
    pub axioms: Vec<AxiomResidual>,
    /// Informational only; never required.
    pub commutative: bool,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }

    pub fn residual(&self, axiom: Axiom) -> f64 {
        self.axioms
            .iter()
            .find(|a| a.axiom == axiom)
            .map_or(f64::NAN, |a| a.residual)
    }

    pub fn holds(&self, axiom: Axiom) -> bool {
        self.axioms.iter().any(|a| a.axiom == axiom && a.pass)
    }

    pub fn failed(&self) -> Vec<Axiom> {
        self.axioms.iter().filter(|a| !a.pass).map(|a| a.axiom).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.axioms.iter().map(|a| a.residual).fold(0.0, f64::max)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .axioms
            .iter()
            .map(|a| {
                format!(
                    "{}={:.3e}{}",
                    a.axiom.name(),
                    a.residual,
                    if a.pass { "" } else { " FAIL" }
                )
            })
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// `(A, m, u)` with `m : A⊗A -> A` and `u : I -> A`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusStructure<S> {
    carrier: Object,
    mult: Matrix<S>,
    unit: Matrix<S>,
}

impl<S: Scalar> FrobeniusStructure<S> {
    /// Shape-checked constructor. Does not check the axioms; see
    /// [`FrobeniusStructure::validated`].
    pub fn new(carrier: Object, mult: Matrix<S>, unit: Matrix<S>) -> Result<Self, FrobeniusError> {
        let d = carrier.dim();
        if mult.shape() != (d, d * d) {
            return Err(FrobeniusError::MultShape {
                dim: d,
                expected_cols: d * d,
                shape: mult.shape(),
            });
        }
        if unit.shape() != (d, 1) {
            return Err(FrobeniusError::UnitShape {
                dim: d,
                shape: unit.shape(),
            });
        }
        Ok(FrobeniusStructure { carrier, mult, unit })
    }

    /// The structure if it passes every axiom at `eps`, otherwise the report.
    pub fn validated(self, eps: f64) -> Result<Self, FrobeniusError> {
        let report = self.check(eps)?;
        if report.passes() {
            Ok(self)
        } else {
            Err(FrobeniusError::NotFrobenius(report))
        }
    }

    /// The trivial structure on the unit object.
    pub fn trivial() -> Self {
        FrobeniusStructure {
            carrier: Object::unit(),
            mult: Matrix::identity(1),
            unit: Matrix::identity(1),
        }
    }

    /// Copying structure on a `d`-element basis: `m(e_i ⊗ e_j) = δ_ij e_i`,
    /// `u = Σ e_i`.
    pub fn classical(d: usize) -> Result<Self, FrobeniusError> {
        if d == 0 {
            return Err(FrobeniusError::ZeroDimension);
        }
        let mult = Matrix::from_fn(d, d * d, |k, col| if col == k * d + k { S::one() } else { S::zero() });
        let unit = Matrix::from_fn(d, 1, |_, _| S::one());
        FrobeniusStructure::new(Object::simple(d), mult, unit)
    }

    pub fn carrier(&self) -> &Object {
        &self.carrier
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn mult(&self) -> &Matrix<S> {
        &self.mult
    }

    pub fn unit(&self) -> &Matrix<S> {
        &self.unit
    }

    pub fn comult(&self) -> Matrix<S> {
        self.mult.dagger()
    }

    pub fn counit(&self) -> Matrix<S> {
        self.unit.dagger()
    }

    pub fn mult_morphism(&self) -> Morphism<S> {
        Morphism::new(
            self.carrier.tensor(&self.carrier),
            self.carrier.clone(),
            self.mult.clone(),
        )
        .expect("shape validated at construction")
    }

    pub fn unit_morphism(&self) -> Morphism<S> {
        Morphism::new(Object::unit(), self.carrier.clone(), self.unit.clone()).expect("shape validated at construction")
    }

    /// Evaluates both sides of every axiom and reports the residuals.
    ///
    /// Both sides are contracted over the nonzero structure constants only,
    /// so sparse structures on large carriers stay cheap.
    pub fn check(&self, eps: f64) -> Result<AxiomReport, FrobeniusError> {
        let d = self.dim();
        let nz = StructureConstants::new(&self.mult);
        let u: Vec<S> = (0..d).map(|k| self.unit.get(k, 0)).collect();
        let mut identity = Sparse::new();
        for k in 0..d {
            identity.add(k * d + k, S::one());
        }

        let (mut assoc_l, mut assoc_r) = (Sparse::new(), Sparse::new());
        let (mut unit_l, mut unit_r) = (Sparse::new(), Sparse::new());
        let (mut frob_l, mut frob_r) = (Sparse::new(), Sparse::new());
        for &(x, a, b, v1) in &nz.entries {
            for &(k, c, v2) in &nz.by_first[x] {
                assoc_l.add(k * d * d * d + (a * d + b) * d + c, v2 * v1);
            }
            for &(k, a2, v2) in &nz.by_second[x] {
                assoc_r.add(k * d * d * d + (a2 * d + a) * d + b, v2 * v1);
            }
            unit_l.add(x * d + b, v1 * u[a]);
            unit_r.add(x * d + a, v1 * u[b]);
            // entry m[x, (a, b)] read as m[a', (c, y)] with a' = x, c = a, y = b
            for &(e, b2, v2) in &nz.by_first[b] {
                frob_l.add((a * d + e) * d * d + x * d + b2, v1.conj() * v2);
                frob_r.add((x * d + b2) * d * d + a * d + e, v1 * v2.conj());
            }
        }
        let mut special = Sparse::new();
        let mut middle = Sparse::new();
        for column in nz.by_column.values() {
            for &(k, v1) in column {
                for &(l, v2) in column {
                    special.add(k * d + l, v1 * v2.conj());
                }
            }
        }
        for row in &nz.by_out {
            for &(c, e, v1) in row {
                for &(a, b, v2) in row {
                    middle.add((c * d + e) * d * d + a * d + b, v1.conj() * v2);
                }
            }
        }

        let residuals = [
            (Axiom::Associativity, assoc_l.residual(&assoc_r)),
            (Axiom::LeftUnit, unit_l.residual(&identity)),
            (Axiom::RightUnit, unit_r.residual(&identity)),
            (Axiom::Specialty, special.residual(&identity)),
            (Axiom::FrobeniusLeft, frob_l.residual(&middle)),
            (Axiom::FrobeniusRight, frob_r.residual(&middle)),
        ];
        let commutative = (0..d).all(|k| {
            (0..d).all(|a| (0..d).all(|b| self.mult.get(k, a * d + b).distance(self.mult.get(k, b * d + a)) <= eps))
        });
        Ok(AxiomReport {
            eps,
            axioms: residuals
                .into_iter()
                .map(|(axiom, residual)| AxiomResidual {
                    axiom,
                    residual,
                    pass: residual <= eps,
                })
                .collect(),
            commutative,
        })
    }

    /// Block-diagonal sum on a carrier of dimension `d_a + d_b`; products
    /// across the two blocks vanish.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let d = da + db;
        let mut mult = Matrix::zeros(d, d * d);
        for k in 0..da {
            for i in 0..da {
                for j in 0..da {
                    mult.set(k, i * d + j, self.mult.get(k, i * da + j));
                }
            }
        }
        for k in 0..db {
            for i in 0..db {
                for j in 0..db {
                    mult.set(da + k, (da + i) * d + da + j, other.mult.get(k, i * db + j));
                }
            }
        }
        let unit = Matrix::from_fn(d, 1, |k, _| {
            if k < da {
                self.unit.get(k, 0)
            } else {
                other.unit.get(k - da, 0)
            }
        });
        FrobeniusStructure {
            carrier: Object::simple(d),
            mult,
            unit,
        }
    }

    /// The structure on `A⊗B`: multiply the `A` halves and the `B` halves
    /// separately, `m((a1⊗b1) ⊗ (a2⊗b2)) = m_A(a1⊗a2) ⊗ m_B(b1⊗b2)`.
    pub fn tensor_structure(&self, other: &Self) -> Result<Self, FrobeniusError> {
        let (da, db) = (self.dim(), other.dim());
        let mult = self
            .mult
            .kron(&other.mult)
            .permute_factors(&[da * db], &[da, da, db, db], &[0], &[0, 2, 1, 3])?;
        let unit = self.unit.kron(&other.unit);
        FrobeniusStructure::new(self.carrier.tensor(&other.carrier), mult, unit)
    }

    /// Same structure with the carrier relabelled (dimensions must agree).
    pub fn with_carrier(self, carrier: Object) -> Result<Self, FrobeniusError> {
        FrobeniusStructure::new(carrier, self.mult, self.unit)
    }
}

/// The scalar `z` with `z² · d = 1`, stored exactly through its square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositiveScalar {
    square: Ratio<u64>,
}

impl PositiveScalar {
    /// # Panics
    /// If `d` is zero.
    pub fn for_dimension(d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        PositiveScalar {
            square: Ratio::new(1, d as u64),
        }
    }

    pub fn square(&self) -> Ratio<u64> {
        self.square
    }

    /// Exact check of `z · z · dim = 1`.
    pub fn closes_loop(&self, dim: usize) -> bool {
        self.square * Ratio::from_integer(dim as u64) == Ratio::one()
    }

    pub fn value<T: RealField>(&self) -> T {
        let n = T::from_u64(*self.square.numer()).expect("small integer");
        let d = T::from_u64(*self.square.denom()).expect("small integer");
        (n / d).sqrt()
    }
}

impl<T: RealField> FrobeniusStructure<Complex<T>> {
    /// The matrix-algebra structure on `A⊗A*` with `dim A = d`:
    /// `m = z·(1 ⊗ cap ⊗ 1)`, `u = z·d·cup`, `z = 1/√d`.
    pub fn pants(d: usize) -> Result<Self, FrobeniusError> {
        if d == 0 {
            return Err(FrobeniusError::ZeroDimension);
        }
        let z = PositiveScalar::for_dimension(d).value::<T>();
        let zc = Complex::new(z, T::zero());
        let a = Object::simple(d);
        let id = Matrix::<Complex<T>>::identity(d);
        let cap = Morphism::<Complex<T>>::cap(&a).into_matrix();
        let cup = Morphism::<Complex<T>>::cup(&a).into_matrix();
        let mult = id.kron(&cap).kron(&id).scale(zc);
        let unit = cup.scale(zc * T::from_usize(d).expect("small integer"));
        let carrier = if d == 1 {
            Object::unit()
        } else {
            Object::new(vec![d, d])?
        };
        FrobeniusStructure::new(carrier, mult, unit)
    }

    /// Group algebra of `Z_n`: `m(e_g ⊗ e_h) = n^{-1/2} e_{g+h}`, `u = √n e_0`.
    pub fn cyclic_group_algebra(n: usize) -> Result<Self, FrobeniusError> {
        if n == 0 {
            return Err(FrobeniusError::ZeroDimension);
        }
        let nn = T::from_usize(n).expect("small integer");
        let inv_sqrt = Complex::new(nn.sqrt().recip(), T::zero());
        let mult = Matrix::from_fn(n, n * n, |k, col| {
            if (col / n + col % n) % n == k {
                inv_sqrt
            } else {
                Complex::zero()
            }
        });
        let unit = Matrix::from_fn(n, 1, |k, _| {
            if k == 0 {
                Complex::new(nn.sqrt(), T::zero())
            } else {
                Complex::zero()
            }
        });
        FrobeniusStructure::new(Object::simple(n), mult, unit)
    }

    /// Transport along a unitary `U`: `m' = U m (U† ⊗ U†)`, `u' = U u`.
    pub fn conjugate_by(&self, u: &Matrix<Complex<T>>) -> Result<Self, FrobeniusError> {
        let ud = u.dagger();
        let mult = u.matmul(&self.mult)?.matmul(&ud.kron(&ud))?;
        let unit = u.matmul(&self.unit)?;
        FrobeniusStructure::new(self.carrier.clone(), mult, unit)
    }
}

impl FrobeniusStructure<Bit> {
    /// The Rel structure of a partial composition table on `n` elements:
    /// `m` relates `(g, h)` to `g·h` where defined, and the unit relates the
    /// point to every idempotent (identity) element.
    ///
    /// The axioms hold exactly iff the table is a groupoid.
    pub fn groupoid(n: usize, table: &[Vec<Option<usize>>]) -> Result<Self, FrobeniusError> {
        if n == 0 {
            return Err(FrobeniusError::ZeroDimension);
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(FrobeniusError::MalformedTable(format!("expected a {n}x{n} table")));
        }
        let mut mult = Matrix::zeros(n, n * n);
        for (g, row) in table.iter().enumerate() {
            for (h, &entry) in row.iter().enumerate() {
                if let Some(k) = entry {
                    if k >= n {
                        return Err(FrobeniusError::MalformedTable(format!(
                            "entry {g}·{h} = {k} is out of range"
                        )));
                    }
                    mult.set(k, g * n + h, Bit::ONE);
                }
            }
        }
        let unit = Matrix::from_fn(n, 1, |e, _| Bit(table[e][e] == Some(e)));
        FrobeniusStructure::new(Object::simple(n), mult, unit)
    }
}

/// Nonzero entries `m[k, (i, j)]` with lookup tables.
struct StructureConstants<S> {
    entries: Vec<(usize, usize, usize, S)>,
    /// `by_first[i]` holds `(k, j, v)`.
    by_first: Vec<Vec<(usize, usize, S)>>,
    /// `by_second[j]` holds `(k, i, v)`.
    by_second: Vec<Vec<(usize, usize, S)>>,
    /// `by_out[k]` holds `(i, j, v)`.
    by_out: Vec<Vec<(usize, usize, S)>>,
    by_column: HashMap<usize, Vec<(usize, S)>>,
}

impl<S: Scalar> StructureConstants<S> {
    fn new(m: &Matrix<S>) -> Self {
        let d = m.rows();
        let mut sc = StructureConstants {
            entries: Vec::new(),
            by_first: vec![Vec::new(); d],
            by_second: vec![Vec::new(); d],
            by_out: vec![Vec::new(); d],
            by_column: HashMap::new(),
        };
        for k in 0..d {
            for col in 0..d * d {
                let v = m.get(k, col);
                if v == S::zero() {
                    continue;
                }
                let (i, j) = (col / d, col % d);
                sc.entries.push((k, i, j, v));
                sc.by_first[i].push((k, j, v));
                sc.by_second[j].push((k, i, v));
                sc.by_out[k].push((i, j, v));
                sc.by_column.entry(col).or_default().push((k, v));
            }
        }
        sc
    }
}

/// Sparse accumulator keyed by flat index.
struct Sparse<S>(HashMap<usize, S>);

impl<S: Scalar> Sparse<S> {
    fn new() -> Self {
        Sparse(HashMap::new())
    }

    fn add(&mut self, key: usize, v: S) {
        let slot = self.0.entry(key).or_insert(S::zero());
        *slot = *slot + v;
    }

    fn residual(&self, other: &Sparse<S>) -> f64 {
        let one_sided = |a: &Sparse<S>, b: &Sparse<S>| {
            a.0.iter()
                .map(|(k, v)| v.distance(b.0.get(k).copied().unwrap_or(S::zero())))
                .fold(0.0, f64::max)
        };
        one_sided(self, other).max(one_sided(other, self))
    }
}

/// Axiom report for `s` at `eps`.
pub fn check_frobenius<S: Scalar>(s: &FrobeniusStructure<S>, eps: f64) -> Result<AxiomReport, FrobeniusError> {
    s.check(eps)
}

/// See [`FrobeniusStructure::groupoid`].
pub fn groupoid_structure(n: usize, table: &[Vec<Option<usize>>]) -> Result<FrobeniusStructure<Bit>, FrobeniusError> {
    FrobeniusStructure::groupoid(n, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type CF = FrobeniusStructure<Complex64>;
    const EPS: f64 = 1e-9;

    /// Independent evaluator: contracts both sides of each axiom with
    /// explicit index loops over the structure constants.
    fn brute_force_residuals<S: Scalar>(s: &FrobeniusStructure<S>) -> Vec<(Axiom, f64)> {
        let d = s.dim();
        let m = |k: usize, i: usize, j: usize| s.mult().get(k, i * d + j);
        let md = |i: usize, j: usize, k: usize| s.mult().get(k, i * d + j).conj();
        let u = |k: usize| s.unit().get(k, 0);
        let delta = |a: usize, b: usize| if a == b { S::one() } else { S::zero() };
        let sum = |f: &dyn Fn(usize) -> S| (0..d).fold(S::zero(), |acc, x| acc + f(x));
        let mut worst = [0.0f64; 6];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for out in 0..d {
                        let lhs = sum(&|x| m(out, x, c) * m(x, a, b));
                        let rhs = sum(&|x| m(out, a, x) * m(x, b, c));
                        worst[0] = worst[0].max(lhs.distance(rhs));
                    }
                }
                worst[1] = worst[1].max(sum(&|x| m(b, x, a) * u(x)).distance(delta(a, b)));
                worst[2] = worst[2].max(sum(&|x| m(b, a, x) * u(x)).distance(delta(a, b)));
                // m m† = 1
                let spec = (0..d * d).fold(S::zero(), |acc, ij| acc + m(a, ij / d, ij % d) * md(ij / d, ij % d, b));
                worst[3] = worst[3].max(spec.distance(delta(a, b)));
                for c in 0..d {
                    for e in 0..d {
                        // inputs (a, b), outputs (c, e)
                        let middle = sum(&|x| md(c, e, x) * m(x, a, b));
                        let left = sum(&|x| md(c, x, a) * m(e, x, b));
                        let right = sum(&|x| m(c, a, x) * md(x, e, b));
                        worst[4] = worst[4].max(left.distance(middle));
                        worst[5] = worst[5].max(right.distance(middle));
                    }
                }
            }
        }
        Axiom::ALL.iter().copied().zip(worst).collect()
    }

    fn assert_sound<S: Scalar>(s: &FrobeniusStructure<S>) {
        let report = s.check(EPS).unwrap();
        for (axiom, r) in brute_force_residuals(s) {
            assert!(
                (report.residual(axiom) - r).abs() <= 1e-12,
                "{axiom:?}: checker {} vs brute force {r}",
                report.residual(axiom)
            );
        }
    }

    #[test]
    fn generators_pass() {
        for d in 1..=4 {
            let s = CF::classical(d).unwrap();
            assert!(s.check(EPS).unwrap().passes());
            assert!(s.check(EPS).unwrap().commutative);
            assert_sound(&s);
        }
        for d in 1..=3 {
            let s = CF::pants(d).unwrap();
            let r = s.check(EPS).unwrap();
            assert!(r.passes(), "pants({d}): {r}");
            assert_eq!(r.commutative, d == 1);
            assert_sound(&s);
        }
        for n in 1..=4 {
            let s = CF::cyclic_group_algebra(n).unwrap();
            assert!(s.check(EPS).unwrap().passes());
            assert_sound(&s);
        }
    }

    #[test]
    fn pants_one_and_classical_one_are_trivial() {
        let p = CF::pants(1).unwrap();
        assert_eq!(p.mult(), &Matrix::identity(1));
        assert_eq!(p.unit(), &Matrix::identity(1));
        assert_eq!(CF::classical(1).unwrap().mult(), CF::trivial().mult());
        let c = CF::cyclic_group_algebra(1).unwrap();
        assert_eq!(c.mult(), CF::trivial().mult());
        assert_eq!(c.unit(), CF::trivial().unit());
    }

    #[test]
    fn classical_two_layout() {
        let c = CF::classical(2).unwrap();
        let expected = Matrix::from_real(2, 4, &[1., 0., 0., 0., 0., 0., 0., 1.]).unwrap();
        assert_eq!(c.mult(), &expected);
    }

    #[test]
    fn cyclic_two_specialty_is_tight() {
        let c = CF::cyclic_group_algebra(2).unwrap();
        assert!(c.check(EPS).unwrap().residual(Axiom::Specialty) <= 1e-15);
    }

    #[test]
    fn corrupted_unit_fails_only_the_unit_laws() {
        let c = CF::classical(2).unwrap();
        let bad = CF::new(c.carrier().clone(), c.mult().clone(), Matrix::basis(2, 0)).unwrap();
        let r = bad.check(EPS).unwrap();
        assert!(!r.passes());
        assert_eq!(r.failed(), vec![Axiom::LeftUnit, Axiom::RightUnit]);
        assert!(matches!(bad.validated(EPS), Err(FrobeniusError::NotFrobenius(_))));
    }

    #[test]
    fn circle_equation_is_exact() {
        for d in 1..=8 {
            let z = PositiveScalar::for_dimension(d);
            assert!(z.closes_loop(d));
            assert!(!z.closes_loop(d + 1));
            let v: f64 = z.value();
            assert!((v * v * d as f64 - 1.0).abs() < 1e-15);
        }
        assert_eq!(PositiveScalar::for_dimension(2).value::<f64>(), 0.5f64.sqrt());
    }

    #[test]
    fn direct_sums() {
        let c1 = CF::classical(1).unwrap();
        let s = c1.direct_sum(&c1);
        assert_eq!(s.mult(), CF::classical(2).unwrap().mult());
        assert_eq!(s.unit(), CF::classical(2).unwrap().unit());
        let qb = CF::pants(2).unwrap().direct_sum(&c1);
        assert_eq!(qb.dim(), 5);
        assert!(qb.check(EPS).unwrap().passes());
        assert_sound(&qb);
        let left = c1.direct_sum(&c1).direct_sum(&c1);
        let right = c1.direct_sum(&c1.direct_sum(&c1));
        assert_eq!(left, right);
    }

    #[test]
    fn tensor_structures() {
        let triv = CF::trivial();
        let p = CF::pants(2).unwrap();
        let tp = triv.tensor_structure(&p).unwrap();
        assert_eq!(tp.mult(), p.mult());
        assert_eq!(tp.unit(), p.unit());

        let c2 = CF::classical(2).unwrap();
        let cc = c2.tensor_structure(&c2).unwrap();
        // entrywise comparison with classical(4) on the basis (i, j) -> 2i + j
        let c4 = CF::classical(4).unwrap();
        assert_eq!(cc.mult(), c4.mult());
        assert_eq!(cc.unit(), c4.unit());

        let pc = p.tensor_structure(&c2).unwrap();
        assert!(pc.check(EPS).unwrap().passes());
        assert_eq!(pc.carrier().factors(), &[2, 2, 2]);
    }

    #[test]
    fn unitary_transport_keeps_axioms() {
        let (a, b) = (std::f64::consts::PI / 6.0, std::f64::consts::PI / 3.0);
        let u = Matrix::from_rows(vec![
            vec![Complex64::new(a.cos(), 0.0), -Complex64::from_polar(a.sin(), -b)],
            vec![Complex64::from_polar(a.sin(), b), Complex64::new(a.cos(), 0.0)],
        ])
        .unwrap();
        let s = CF::classical(2).unwrap().conjugate_by(&u).unwrap();
        assert!(s.check(EPS).unwrap().passes());
        assert_sound(&s);
    }

    #[test]
    fn rel_groupoids() {
        let z2 = FrobeniusStructure::<Bit>::groupoid(2, &[vec![Some(0), Some(1)], vec![Some(1), Some(0)]]).unwrap();
        let r = z2.check(0.0).unwrap();
        assert!(r.passes(), "{r}");
        assert_eq!(r.max_residual(), 0.0);
        assert_sound(&z2);

        let discrete = FrobeniusStructure::<Bit>::groupoid(2, &[vec![Some(0), None], vec![None, Some(1)]]).unwrap();
        assert_eq!(discrete, FrobeniusStructure::<Bit>::classical(2).unwrap());
        assert!(discrete.check(0.0).unwrap().passes());

        let broken = FrobeniusStructure::<Bit>::groupoid(2, &[vec![Some(0), Some(1)], vec![Some(1), None]]).unwrap();
        let r = broken.check(0.0).unwrap();
        assert!(!r.holds(Axiom::FrobeniusLeft));
        assert_eq!(r.residual(Axiom::FrobeniusLeft), 1.0);
        assert_sound(&broken);
    }

    #[test]
    fn malformed_tables() {
        assert!(matches!(
            FrobeniusStructure::<Bit>::groupoid(2, &[vec![Some(0)]]),
            Err(FrobeniusError::MalformedTable(_))
        ));
        assert!(matches!(
            FrobeniusStructure::<Bit>::groupoid(1, &[vec![Some(3)]]),
            Err(FrobeniusError::MalformedTable(_))
        ));
    }

    #[test]
    fn exact_rational_classical() {
        let s = FrobeniusStructure::<Ratio<i64>>::classical(3).unwrap();
        let r = s.check(0.0).unwrap();
        assert!(r.passes());
        assert_eq!(r.max_residual(), 0.0);
    }

    #[test]
    fn shape_errors() {
        let bad = FrobeniusStructure::<f64>::new(Object::simple(2), Matrix::zeros(2, 2), Matrix::zeros(2, 1));
        assert!(matches!(bad, Err(FrobeniusError::MultShape { .. })));
        let bad = FrobeniusStructure::<f64>::new(Object::simple(2), Matrix::zeros(2, 4), Matrix::zeros(1, 1));
        assert!(matches!(bad, Err(FrobeniusError::UnitShape { .. })));
    }
}
