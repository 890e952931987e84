//! Completely positive maps and their categorical constructions over
//! finite-dimensional Hilbert spaces and relations.
//!
//! Matrices, morphisms and Frobenius structures are generic over a
//! [`Scalar`]: complex `f64`/`f32` numbers model Hilbert spaces, exact
//! rationals are available for algebraic checks, and [`Bit`] models
//! relations. The numeric decisions (eigensystems, complete positivity,
//! purification) are generic over the real field. The aliases below fix the
//! common `f64` instances.

pub mod category;
pub mod cpm;
pub mod cpstar;
pub mod frobenius;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod tensor;
pub mod theorems;
pub mod tolerance;

pub use num_complex::Complex64;

pub use category::{CategoryError, Morphism, Object};
pub use cpm::{
    check_environment, cpm_compose, cpm_dagger, cpm_equal, cpm_tensor, discard, functor_p, realize, ChoiMatrix,
    CpDecision, CpmError, EnvironmentSamples, SignFlippedDiscard, TraceDiscard,
};
pub use cpstar::{
    check_decoherence, cpstar_compose, cpstar_dagger, cpstar_membership, cpstar_purify, cpstar_tensor, dagger_frob_map,
    decoherence_idempotent, frob_map, functor_q, grounded_comultiplication, is_cpstar, sandwich_realize,
    trace_functional, CanonicalFrob, CpStarError, MembershipFailure, SignFlippedFrob,
};
pub use frobenius::{check_frobenius, groupoid_structure, Axiom, AxiomReport, FrobeniusError, PositiveScalar};
pub use report::{CheckEntry, CheckReport};
pub use scalar::{Bit, RealField, Scalar};
pub use tensor::{approx_equal, hermitian_eig, Eigensystem, Matrix, TensorError};
pub use theorems::{corollary_isomorphism_check, mediating_cpm, mediating_cpstar, verify_functor_laws, Kind};
pub use tolerance::Tolerance;

/// Complex double-precision matrix.
pub type ComplexMatrix = Matrix<Complex64>;
/// Single-precision counterpart of [`ComplexMatrix`].
pub type ComplexMatrix32 = Matrix<num_complex::Complex32>;
/// Exact rational matrix.
pub type RationalMatrix = Matrix<num_rational::Ratio<i64>>;
/// Boolean matrix, a relation between finite sets.
pub type Relation = Matrix<Bit>;

pub type FHilbMorphism = Morphism<Complex64>;
pub type RelMorphism = Morphism<Bit>;

pub type FrobeniusStructure = frobenius::FrobeniusStructure<Complex64>;
pub type RelFrobeniusStructure = frobenius::FrobeniusStructure<Bit>;

pub type CpmMorphism = cpm::CpmMorphism<Complex64>;
pub type RelCpmMorphism = cpm::CpmMorphism<Bit>;
pub type Superoperator = cpm::Superoperator<Complex64>;

pub type CpStarMorphism = cpstar::CpStarMorphism<f64>;
pub type FrobMap = cpstar::FrobMap<Complex64>;
