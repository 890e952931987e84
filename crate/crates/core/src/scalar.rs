//! Scalar types the matrix layer is generic over.
//!
//! Everything structural (composition, tensor, dagger, wire permutations,
//! Frobenius axioms) only needs a semiring with an involution, so it runs
//! unchanged over complex floats (FHilb), exact rationals, and booleans
//! (Rel). Spectral work (positivity, purification) additionally needs
//! [`RealField`].

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul};

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, One, Zero};

/// A commutative semiring with an involution (`conj`), plus a distance used
/// to report residuals.
///
/// Exact types report a distance of zero iff the two values are equal.
pub trait Scalar:
    Copy + PartialEq + Debug + Send + Sync + Zero + One + Add<Output = Self> + Mul<Output = Self> + 'static
{
    fn conj(self) -> Self;

    fn distance(self, other: Self) -> f64;

    /// Whether the value is finite. Always true for exact types.
    fn is_finite(self) -> bool {
        true
    }
}

/// Real floating point types the spectral routines accept.
pub trait RealField: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl RealField for f32 {}
impl RealField for f64 {}

impl Scalar for f32 {
    fn conj(self) -> Self {
        self
    }
    fn distance(self, other: Self) -> f64 {
        f64::from((self - other).abs())
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
}

impl Scalar for f64 {
    fn conj(self) -> Self {
        self
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl<T: RealField> Scalar for Complex<T> {
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).norm().to_f64_lossy()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Scalar for Ratio<i64> {
    fn conj(self) -> Self {
        self
    }
    fn distance(self, other: Self) -> f64 {
        let d = self - other;
        (*d.numer() as f64 / *d.denom() as f64).abs()
    }
}

/// Boolean scalar of the relation semiring: `+` is or, `*` is and.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bit(pub bool);

impl Bit {
    pub const ZERO: Bit = Bit(false);
    pub const ONE: Bit = Bit(true);
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        Bit(b)
    }
}

impl Display for Bit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(self.0))
    }
}

impl Add for Bit {
    type Output = Bit;
    fn add(self, rhs: Bit) -> Bit {
        Bit(self.0 || rhs.0)
    }
}

impl Mul for Bit {
    type Output = Bit;
    fn mul(self, rhs: Bit) -> Bit {
        Bit(self.0 && rhs.0)
    }
}

impl Zero for Bit {
    fn zero() -> Self {
        Bit(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
}

impl One for Bit {
    fn one() -> Self {
        Bit(true)
    }
}

impl Scalar for Bit {
    fn conj(self) -> Self {
        self
    }
    fn distance(self, other: Self) -> f64 {
        if self == other {
            0.0
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_is_the_boolean_semiring() {
        for a in [Bit::ZERO, Bit::ONE] {
            for b in [Bit::ZERO, Bit::ONE] {
                assert_eq!((a + b).0, a.0 || b.0);
                assert_eq!((a * b).0, a.0 && b.0);
            }
            assert_eq!(a + Bit::zero(), a);
            assert_eq!(a * Bit::one(), a);
        }
    }

    #[test]
    fn distances() {
        assert_eq!(Bit::ONE.distance(Bit::ZERO), 1.0);
        assert_eq!(Ratio::new(1i64, 3).distance(Ratio::new(1, 3)), 0.0);
        let z = Complex::new(3.0f64, 4.0);
        assert!((z.distance(Complex::zero()) - 5.0).abs() < 1e-15);
        assert_eq!(Scalar::conj(Complex::new(1.0f64, 2.0)), Complex::new(1.0, -2.0));
        assert!(!Scalar::is_finite(Complex::new(f64::NAN, 0.0)));
    }
}
