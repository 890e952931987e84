use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every floating point check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Equality of morphisms, Hermiticity, axiom residuals.
    pub structural_eps: f64,
    /// Reconstruction after a decomposition (eigensystems, purification).
    pub roundtrip_eps: f64,
    /// Jacobi off-diagonal threshold; eigenvalues below it are clamped to 0.
    pub eig_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            structural_eps: 1e-9,
            roundtrip_eps: 1e-8,
            eig_eps: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("tolerance `{name}` must be strictly positive and finite, got {value}")]
pub struct InvalidTolerance {
    pub name: &'static str,
    pub value: f64,
}

impl Tolerance {
    pub fn new(structural_eps: f64, roundtrip_eps: f64, eig_eps: f64) -> Result<Self, InvalidTolerance> {
        for (name, value) in [
            ("structural_eps", structural_eps),
            ("roundtrip_eps", roundtrip_eps),
            ("eig_eps", eig_eps),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(InvalidTolerance { name, value });
            }
        }
        Ok(Tolerance {
            structural_eps,
            roundtrip_eps,
            eig_eps,
        })
    }

    /// Thresholds usable with `f32` arithmetic.
    pub fn single_precision() -> Self {
        Tolerance {
            structural_eps: 1e-5,
            roundtrip_eps: 1e-4,
            eig_eps: 1e-6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive() {
        assert!(Tolerance::new(1e-9, 1e-8, 1e-10).is_ok());
        assert_eq!(Tolerance::new(0.0, 1e-8, 1e-10).unwrap_err().name, "structural_eps");
        assert!(Tolerance::new(1e-9, f64::NAN, 1e-10).is_err());
        assert!(Tolerance::new(1e-9, 1e-8, -1.0).is_err());
    }
}
