//! Jones vectors: two-component complex polarization amplitudes.
//!
//! States are normalized and compared up to a global phase; the physics
//! lives on the Poincaré sphere, so [`JonesVector::stokes`] is the
//! canonical reduction and `sop_equal` the canonical equality.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stokes::{StokesVector, UNIT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl JonesVector {
    pub fn new(a0: Complex64, a1: Complex64) -> Self {
        Self { a0, a1 }
    }

    pub fn from_reals(a0: f64, a1: f64) -> Self {
        Self::new(Complex64::new(a0, 0.0), Complex64::new(a1, 0.0))
    }

    pub fn horizontal() -> Self {
        Self::from_reals(1.0, 0.0)
    }

    pub fn vertical() -> Self {
        Self::from_reals(0.0, 1.0)
    }

    pub fn diagonal() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_reals(r, r)
    }

    pub fn anti_diagonal() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_reals(r, -r)
    }

    pub fn right_circular() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(Complex64::new(r, 0.0), Complex64::new(0.0, r))
    }

    pub fn left_circular() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(Complex64::new(r, 0.0), Complex64::new(0.0, -r))
    }

    pub fn norm_sq(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq().sqrt();
        if n < 1e-12 {
            return Err(Error::NotUnit(0.0));
        }
        Ok(Self::new(self.a0 / n, self.a1 / n))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tol
    }

    pub fn validate_normalized(&self) -> Result<()> {
        if self.is_normalized(UNIT_TOL) {
            Ok(())
        } else {
            Err(Error::NotUnit(self.norm_sq().sqrt()))
        }
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    /// Stokes reduction. Assumes a normalized state; use
    /// [`stokes_from_jones`] for validated input.
    pub fn stokes(&self) -> StokesVector {
        let c = self.a0.conj() * self.a1;
        StokesVector::new(
            self.a0.norm_sqr() - self.a1.norm_sqr(),
            2.0 * c.re,
            2.0 * c.im,
        )
    }

    /// Canonical Jones representative of a unit Stokes vector (one fixed
    /// choice of global phase).
    pub fn from_stokes(s: &StokesVector) -> Result<Self> {
        s.validate_unit()?;
        let theta = s.s1.clamp(-1.0, 1.0).acos();
        let phi = s.s3.atan2(s.s2);
        let (half_sin, half_cos) = (0.5 * theta).sin_cos();
        Ok(Self::new(
            Complex64::new(half_cos, 0.0),
            Complex64::from_polar(half_sin, phi),
        ))
    }
}

/// Validated Jones → Stokes map.
pub fn stokes_from_jones(j: &JonesVector) -> Result<StokesVector> {
    j.validate_normalized()?;
    Ok(j.stokes())
}

/// `|<j1|j2>|²`, the overlap of two pure polarization states. Equals
/// `(1 + s1·s2)/2` in Stokes form. Both inputs must be normalized.
pub fn fidelity(j1: &JonesVector, j2: &JonesVector) -> f64 {
    debug_assert!(j1.is_normalized(1e-6) && j2.is_normalized(1e-6));
    j1.inner(j2).norm_sqr()
}

/// True when the two states describe the same SOP, i.e. are equal up to a
/// global phase.
pub fn sop_equal(j1: &JonesVector, j2: &JonesVector, tol: f64) -> bool {
    j1.stokes().approx_eq(&j2.stokes(), tol)
}

/// Minimal QBER implied by an interference visibility: `(1 - v) / 2`.
pub fn qber_from_visibility(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            name: "visibility",
            value: v,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok((1.0 - v) / 2.0)
}
