//! The compact dagger categories everything is evaluated in.
//!
//! A [`Morphism`] is a matrix between two [`Object`]s, generic over the
//! scalar. With complex entries this is FHilb (composition is the matrix
//! product, the dagger is the conjugate transpose); with [`Bit`] entries it
//! is Rel (composition over the `(or, and)` semiring, the dagger is the
//! transpose). The dual of an object is identified with the object itself
//! through the standard basis, so cups and caps are plain 0/1 vectors.

use std::fmt;

use crate::scalar::{Bit, Scalar};
use crate::tensor::{Matrix, TensorError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CategoryError {
    #[error("boundary mismatch: codomain {found} does not match domain {expected}")]
    Boundary { expected: Object, found: Object },
    #[error("data shape {shape:?} does not match {cod} <- {dom}")]
    DataShape {
        shape: (usize, usize),
        dom: Object,
        cod: Object,
    },
    #[error("object factors must be positive, got {0:?}")]
    ZeroFactor(Vec<usize>),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// An object given by its ordered list of tensor factor dimensions.
///
/// The empty list is the monoidal unit `I` (dimension 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Object {
    factors: Vec<usize>,
}

impl Object {
    pub fn new(factors: Vec<usize>) -> Result<Self, CategoryError> {
        if factors.contains(&0) {
            return Err(CategoryError::ZeroFactor(factors));
        }
        Ok(Object { factors })
    }

    /// A single wire of the given dimension.
    ///
    /// # Panics
    /// If `dim` is zero.
    pub fn simple(dim: usize) -> Self {
        assert!(dim > 0, "object dimension must be positive");
        Object { factors: vec![dim] }
    }

    pub fn unit() -> Self {
        Object { factors: vec![] }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    /// Factor list as used for index bookkeeping; the unit reports `[1]`.
    pub fn wire_dims(&self) -> Vec<usize> {
        if self.factors.is_empty() {
            vec![1]
        } else {
            self.factors.clone()
        }
    }

    pub fn tensor(&self, other: &Object) -> Object {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Object { factors }
    }

    /// The dual object: the same factors in reverse order.
    pub fn dual(&self) -> Object {
        Object {
            factors: self.factors.iter().rev().copied().collect(),
        }
    }

    /// Two objects carry the same wires if they agree after dropping
    /// trivial (dimension 1) factors.
    pub fn same_wires(&self, other: &Object) -> bool {
        let a = self.factors.iter().filter(|&&d| d != 1);
        let b = other.factors.iter().filter(|&&d| d != 1);
        a.eq(b)
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.factors.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// A morphism `dom -> cod`, stored as a `cod.dim() x dom.dim()` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism<S> {
    dom: Object,
    cod: Object,
    data: Matrix<S>,
}

impl<S: Scalar> Morphism<S> {
    pub fn new(dom: Object, cod: Object, data: Matrix<S>) -> Result<Self, CategoryError> {
        if data.shape() != (cod.dim(), dom.dim()) {
            return Err(CategoryError::DataShape {
                shape: data.shape(),
                dom,
                cod,
            });
        }
        Ok(Morphism { dom, cod, data })
    }

    /// A morphism between single-wire objects sized by the matrix.
    pub fn from_matrix(data: Matrix<S>) -> Self {
        Morphism {
            dom: Object::simple(data.cols()),
            cod: Object::simple(data.rows()),
            data,
        }
    }

    pub fn identity(obj: &Object) -> Self {
        Morphism {
            dom: obj.clone(),
            cod: obj.clone(),
            data: Matrix::identity(obj.dim()),
        }
    }

    pub fn dom(&self) -> &Object {
        &self.dom
    }

    pub fn cod(&self) -> &Object {
        &self.cod
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.data
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &Morphism<S>) -> Result<Morphism<S>, CategoryError> {
        if !self.dom.same_wires(&f.cod) {
            return Err(CategoryError::Boundary {
                expected: self.dom.clone(),
                found: f.cod.clone(),
            });
        }
        Ok(Morphism {
            dom: f.dom.clone(),
            cod: self.cod.clone(),
            data: self.data.matmul(&f.data)?,
        })
    }

    pub fn tensor(&self, other: &Morphism<S>) -> Morphism<S> {
        Morphism {
            dom: self.dom.tensor(&other.dom),
            cod: self.cod.tensor(&other.cod),
            data: self.data.kron(&other.data),
        }
    }

    pub fn dagger(&self) -> Morphism<S> {
        Morphism {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            data: self.data.dagger(),
        }
    }

    /// `f_*`: entrywise conjugation with the tensor factors of both
    /// boundaries reversed, so `f : A -> C⊗B` becomes `f_* : A* -> B*⊗C*`.
    pub fn dualize(&self) -> Result<Morphism<S>, CategoryError> {
        let rows = self.cod.wire_dims();
        let cols = self.dom.wire_dims();
        let row_perm: Vec<usize> = (0..rows.len()).rev().collect();
        let col_perm: Vec<usize> = (0..cols.len()).rev().collect();
        let data = self.data.permute_factors(&rows, &cols, &row_perm, &col_perm)?.conj();
        Ok(Morphism {
            dom: self.dom.dual(),
            cod: self.cod.dual(),
            data,
        })
    }

    /// `I -> A⊗A`, the vector `Σ_i e_i ⊗ e_i` (first factor plays `A*`).
    pub fn cup(obj: &Object) -> Morphism<S> {
        let d = obj.dim();
        Morphism {
            dom: Object::unit(),
            cod: obj.tensor(obj),
            data: Matrix::from_fn(d * d, 1, |k, _| if k / d == k % d { S::one() } else { S::zero() }),
        }
    }

    /// `A⊗A -> I`, the dagger of [`Morphism::cup`].
    pub fn cap(obj: &Object) -> Morphism<S> {
        Self::cup(obj).dagger()
    }

    /// The symmetry `A⊗B -> B⊗A`.
    pub fn swap(a: &Object, b: &Object) -> Morphism<S> {
        let (da, db) = (a.dim(), b.dim());
        let data = Matrix::identity(da * db)
            .permute_factors(&[da, db], &[da * db], &[1, 0], &[0])
            .expect("dimensions are consistent by construction");
        Morphism {
            dom: a.tensor(b),
            cod: b.tensor(a),
            data,
        }
    }

    pub fn scale(&self, s: S) -> Morphism<S> {
        Morphism {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            data: self.data.scale(s),
        }
    }

    /// Replace the boundary objects keeping the data (dimensions must agree).
    pub fn with_boundaries(self, dom: Object, cod: Object) -> Result<Morphism<S>, CategoryError> {
        Morphism::new(dom, cod, self.data)
    }

    pub fn residual(&self, other: &Morphism<S>) -> Result<f64, CategoryError> {
        Ok(self.data.max_residual(&other.data)?)
    }

    /// Equality up to `eps`; use `0.0` for exact comparison.
    pub fn approx_eq(&self, other: &Morphism<S>, eps: f64) -> Result<bool, CategoryError> {
        Ok(self.residual(other)? <= eps)
    }
}

impl Morphism<Bit> {
    /// The relation `dom_size -> cod_size` containing exactly `pairs`
    /// (`(input, output)`).
    pub fn relation(dom_size: usize, cod_size: usize, pairs: &[(usize, usize)]) -> Result<Self, CategoryError> {
        let mut data = Matrix::zeros(cod_size, dom_size);
        for &(i, j) in pairs {
            if i >= dom_size || j >= cod_size {
                return Err(CategoryError::Tensor(TensorError::PositionOutOfRange {
                    position: i.max(j),
                    len: dom_size.min(cod_size),
                }));
            }
            data.set(j, i, Bit::ONE);
        }
        Morphism::new(Object::simple(dom_size), Object::simple(cod_size), data)
    }

    pub fn relates(&self, input: usize, output: usize) -> bool {
        self.data.get(output, input).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type F = Morphism<Complex64>;

    fn real(rows: usize, cols: usize, v: &[f64]) -> F {
        F::from_matrix(Matrix::from_real(rows, cols, v).unwrap())
    }

    #[test]
    fn identity_and_involution() {
        let x = real(2, 2, &[0., 1., 1., 0.]);
        let id = F::identity(&Object::simple(2));
        assert_eq!(id.compose(&x).unwrap(), x);
        assert_eq!(x.compose(&x).unwrap(), id);
    }

    #[test]
    fn rel_composition_of_swap() {
        let r = Morphism::relation(2, 2, &[(0, 1), (1, 0)]).unwrap();
        let rr = r.compose(&r).unwrap();
        // boolean product oracle
        for i in 0..2 {
            for k in 0..2 {
                let expected = (0..2).any(|j| r.relates(i, j) && r.relates(j, k));
                assert_eq!(rr.relates(i, k), expected);
            }
        }
        assert_eq!(rr, Morphism::identity(&Object::simple(2)));
    }

    #[test]
    fn boundary_mismatch() {
        let f = real(3, 2, &[0.; 6]);
        assert!(matches!(f.compose(&f), Err(CategoryError::Boundary { .. })));
        assert!(matches!(
            Morphism::new(Object::simple(2), Object::simple(2), Matrix::<Complex64>::zeros(2, 3)),
            Err(CategoryError::DataShape { .. })
        ));
        assert!(Object::new(vec![2, 0]).is_err());
    }

    #[test]
    fn tensor_units() {
        let a = Object::simple(2);
        let b = Object::simple(3);
        assert_eq!(
            F::identity(&a).tensor(&F::identity(&b)).matrix(),
            F::identity(&a.tensor(&b)).matrix()
        );
        let f = real(2, 3, &[1., 2., 3., 4., 5., 6.]);
        let one = F::identity(&Object::unit());
        assert_eq!(one.tensor(&f).matrix(), f.matrix());
    }

    #[test]
    fn dagger_examples() {
        let n = real(2, 2, &[0., 1., 0., 0.]);
        assert_eq!(n.dagger(), real(2, 2, &[0., 0., 1., 0.]));
        let id = F::identity(&Object::simple(3));
        assert_eq!(id.dagger(), id);
    }

    #[test]
    fn cup_cap_and_snakes() {
        let cup = F::cup(&Object::simple(2));
        assert_eq!(cup.matrix(), &Matrix::from_real(4, 1, &[1., 0., 0., 1.]).unwrap());
        for d in 1..=8 {
            let a = Object::simple(d);
            let id = F::identity(&a);
            let left = F::cap(&a).tensor(&id).compose(&id.tensor(&F::cup(&a))).unwrap();
            let right = id.tensor(&F::cap(&a)).compose(&F::cup(&a).tensor(&id)).unwrap();
            assert_eq!(left.matrix(), id.matrix());
            assert_eq!(right.matrix(), id.matrix());
        }
        let loop2 = F::cap(&Object::simple(2)).compose(&F::cup(&Object::simple(2))).unwrap();
        assert_eq!(loop2.matrix().get(0, 0), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn rel_snakes_are_exact() {
        for d in 1..=5 {
            let a = Object::simple(d);
            let id = Morphism::<Bit>::identity(&a);
            let snake = Morphism::<Bit>::cap(&a)
                .tensor(&id)
                .compose(&id.tensor(&Morphism::cup(&a)))
                .unwrap();
            assert_eq!(snake.matrix(), id.matrix());
        }
    }

    #[test]
    fn dualize_types_and_real_diagonal() {
        let d = real(2, 2, &[3., 0., 0., -1.]);
        assert_eq!(d.dualize().unwrap().matrix(), d.matrix());
        // f : A -> C⊗B becomes f_* : A* -> B*⊗C*
        let f = F::new(
            Object::simple(2),
            Object::new(vec![3, 4]).unwrap(),
            Matrix::zeros(12, 2),
        )
        .unwrap();
        let fs = f.dualize().unwrap();
        assert_eq!(fs.cod().factors(), &[4, 3]);
        assert_eq!(fs.dom().factors(), &[2]);
    }

    #[test]
    fn swap_is_involutive() {
        let a = Object::simple(2);
        let b = Object::simple(3);
        let s = F::swap(&a, &b);
        let back = F::swap(&b, &a).compose(&s).unwrap();
        assert_eq!(back.matrix(), &Matrix::identity(6));
    }
}
