//! Stokes vectors: points on the Poincaré sphere.
//!
//! Only fully polarized states are modeled, so a state is a real unit
//! 3-vector. The convention throughout the crate is
//!
//! * `(1, 0, 0)`  horizontal linear,
//! * `(0, 1, 0)`  diagonal (+45°) linear,
//! * `(0, 0, 1)`  right circular,
//!
//! with orthogonal Jones states mapping to antipodal points.

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Tolerance for "is this a unit vector" input validation.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub const fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    pub const fn horizontal() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub const fn vertical() -> Self {
        Self::new(-1.0, 0.0, 0.0)
    }

    pub const fn diagonal() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub const fn anti_diagonal() -> Self {
        Self::new(0.0, -1.0, 0.0)
    }

    pub const fn right_circular() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub const fn left_circular() -> Self {
        Self::new(0.0, 0.0, -1.0)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.s1 * other.s1 + self.s2 * other.s2 + self.s3 * other.s3
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.s2 * other.s3 - self.s3 * other.s2,
            self.s3 * other.s1 - self.s1 * other.s3,
            self.s1 * other.s2 - self.s2 * other.s1,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.s1 * k, self.s2 * k, self.s3 * k)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.s1 + other.s1, self.s2 + other.s2, self.s3 + other.s3)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.s1 - other.s1, self.s2 - other.s2, self.s3 - other.s3)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-12 {
            return Err(Error::ZeroAxis);
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn validate_unit(&self) -> Result<()> {
        if self.is_unit(UNIT_TOL) {
            Ok(())
        } else {
            Err(Error::NotUnit(self.norm()))
        }
    }

    /// Great-circle angle to `other`, both assumed unit.
    pub fn angle_to(&self, other: &Self) -> f64 {
        self.cross(other).norm().atan2(self.dot(other))
    }

    /// Component of `self` perpendicular to unit vector `axis`.
    pub fn perp_to(&self, axis: &Self) -> Self {
        self.sub(&axis.scale(self.dot(axis)))
    }

    pub fn random(rng: &mut SimRng) -> Self {
        let v = rng.unit_vector();
        Self::new(v[0], v[1], v[2])
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sub(other).norm() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_states_are_unit() {
        for s in [
            StokesVector::horizontal(),
            StokesVector::vertical(),
            StokesVector::diagonal(),
            StokesVector::anti_diagonal(),
            StokesVector::right_circular(),
            StokesVector::left_circular(),
        ] {
            assert!(s.is_unit(1e-15));
        }
    }

    #[test]
    fn angle_between_orthogonal_axes() {
        let h = StokesVector::horizontal();
        let d = StokesVector::diagonal();
        assert!((h.angle_to(&d) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((h.angle_to(&h.neg()) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(StokesVector::new(0.0, 0.0, 0.0).normalized().is_err());
    }

    #[test]
    fn cross_handedness() {
        let h = StokesVector::horizontal();
        let d = StokesVector::diagonal();
        // s1 x s2 = s3
        assert!(h.cross(&d).approx_eq(&StokesVector::right_circular(), 1e-15));
    }
}
