//! Bounded six-waveplate polarization controller.
//!
//! The retarder cascade alternates fast-axis orientations 0°, 45°, 0°, …
//! which on the Poincaré sphere means rotations about two perpendicular
//! equatorial axes, s1 and s2. Retardances are bounded (a LiNbO₃ device
//! cannot wind forever), so there is deliberate redundancy: six plates for
//! a three-parameter group, leaving 2π-equivalent settings available when
//! a plate approaches its limit.

use crate::error::{Error, Result};
use crate::stokes::StokesVector;
use crate::unitary::PolUnitary;

pub const PLATE_COUNT: usize = 6;

/// Default retardance bound per plate, radians.
pub const DEFAULT_PHI_MAX: f64 = 3.0 * std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct WaveplateStack {
    retardances: [f64; PLATE_COUNT],
    phi_max: f64,
}

impl WaveplateStack {
    pub fn new(phi_max: f64) -> Self {
        Self {
            retardances: [0.0; PLATE_COUNT],
            phi_max,
        }
    }

    /// Poincaré rotation axis of plate `i`: s1 for even plates (0°
    /// physical orientation), s2 for odd plates (45°).
    pub fn axis(i: usize) -> StokesVector {
        if i.is_multiple_of(2) {
            StokesVector::horizontal()
        } else {
            StokesVector::diagonal()
        }
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }

    pub fn retardances(&self) -> [f64; PLATE_COUNT] {
        self.retardances
    }

    pub fn set_retardances(&mut self, r: [f64; PLATE_COUNT]) -> Result<()> {
        for &phi in &r {
            if phi.abs() > self.phi_max {
                return Err(Error::RetardanceOutOfBounds(phi, self.phi_max));
            }
        }
        self.retardances = r;
        Ok(())
    }

    /// Clamp a candidate setting into the plate bounds.
    pub fn clamped(&self, r: [f64; PLATE_COUNT]) -> [f64; PLATE_COUNT] {
        let mut out = r;
        for phi in &mut out {
            *phi = phi.clamp(-self.phi_max, self.phi_max);
        }
        out
    }

    /// Ordered product of the six plate rotations, first plate applied
    /// first.
    pub fn unitary(&self) -> Result<PolUnitary> {
        for &phi in &self.retardances {
            if phi.abs() > self.phi_max {
                return Err(Error::RetardanceOutOfBounds(phi, self.phi_max));
            }
        }
        Ok(unitary_for(&self.retardances))
    }

    /// Retardance settings exactly reproducing `target` using the first
    /// three plates (an s1–s2–s1 Euler factorization); plates 4–6 are left
    /// at zero. Fails only if the required angles exceed the plate bound,
    /// which cannot happen for `phi_max >= π`.
    pub fn settings_for(target: &PolUnitary, phi_max: f64) -> Result<[f64; PLATE_COUNT]> {
        let [a, b, c] = euler_xyx(target);
        let settings = [c, b, a, 0.0, 0.0, 0.0];
        for &phi in &settings {
            if phi.abs() > phi_max {
                return Err(Error::RetardanceOutOfBounds(phi, phi_max));
            }
        }
        Ok(settings)
    }
}

/// Stack transform for raw retardances, bounds unchecked (the controller
/// clamps before calling).
pub fn unitary_for(retardances: &[f64; PLATE_COUNT]) -> PolUnitary {
    let mut u = PolUnitary::identity();
    for (i, &phi) in retardances.iter().enumerate() {
        let r = PolUnitary::rotation_about(&WaveplateStack::axis(i), phi).expect("unit axis");
        u = r.mul(&u);
    }
    u
}

/// Proper-Euler factorization of a Stokes rotation: angles `[a, b, c]`
/// with `R = R_s1(a) · R_s2(b) · R_s1(c)`, `b ∈ [0, π]`.
pub fn euler_xyx(u: &PolUnitary) -> [f64; 3] {
    let m = u.rotation_matrix();
    let sb = (m[0][1] * m[0][1] + m[0][2] * m[0][2]).sqrt();
    if sb < 1e-9 {
        // Gimbal-degenerate: pure rotation about s1 (b = 0 or π); fold the
        // whole s1 angle into `a`.
        let b = if m[0][0] > 0.0 { 0.0 } else { std::f64::consts::PI };
        let a = m[2][1].atan2(m[1][1]);
        return [a, b, 0.0];
    }
    let b = sb.atan2(m[0][0]);
    let a = m[1][0].atan2(-m[2][0]);
    let c = m[0][1].atan2(m[0][2]);
    [a, b, c]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use std::f64::consts::PI;

    #[test]
    fn all_zero_is_identity() {
        let stack = WaveplateStack::new(DEFAULT_PHI_MAX);
        assert!(stack.unitary().unwrap().rotation_angle() < 1e-15);
    }

    #[test]
    fn single_plate_reproduces_rotation_about() {
        for i in 0..PLATE_COUNT {
            let mut stack = WaveplateStack::new(DEFAULT_PHI_MAX);
            let mut r = [0.0; PLATE_COUNT];
            r[i] = 1.234;
            stack.set_retardances(r).unwrap();
            let expected = PolUnitary::rotation_about(&WaveplateStack::axis(i), 1.234).unwrap();
            assert!(stack.unitary().unwrap().rotation_distance(&expected) < 1e-14);
        }
    }

    #[test]
    fn bounds_are_enforced() {
        let mut stack = WaveplateStack::new(PI);
        let mut r = [0.0; PLATE_COUNT];
        r[3] = PI + 0.1;
        assert!(matches!(
            stack.set_retardances(r),
            Err(Error::RetardanceOutOfBounds(..))
        ));
    }

    #[test]
    fn stack_unitary_is_special_unitary() {
        let mut rng = SimRng::new(31);
        let mut stack = WaveplateStack::new(DEFAULT_PHI_MAX);
        for _ in 0..200 {
            let mut r = [0.0; PLATE_COUNT];
            for phi in &mut r {
                *phi = (rng.f64() - 0.5) * 2.0 * DEFAULT_PHI_MAX;
            }
            stack.set_retardances(r).unwrap();
            assert!(stack.unitary().unwrap().norm_error().abs() < 1e-10);
        }
    }

    #[test]
    fn euler_reconstruction() {
        let mut rng = SimRng::new(32);
        for _ in 0..1000 {
            let target = PolUnitary::random(&mut rng);
            let [a, b, c] = euler_xyx(&target);
            let rebuilt = PolUnitary::rotation_about(&StokesVector::horizontal(), a)
                .unwrap()
                .mul(&PolUnitary::rotation_about(&StokesVector::diagonal(), b).unwrap())
                .mul(&PolUnitary::rotation_about(&StokesVector::horizontal(), c).unwrap());
            assert!(
                rebuilt.rotation_distance(&target) < 1e-9,
                "euler angles [{a}, {b}, {c}] do not reconstruct the rotation"
            );
        }
    }

    #[test]
    fn euler_handles_gimbal_cases() {
        for angle in [0.0, 0.7, PI, -0.7] {
            let target =
                PolUnitary::rotation_about(&StokesVector::horizontal(), angle).unwrap();
            let [a, b, c] = euler_xyx(&target);
            let rebuilt = PolUnitary::rotation_about(&StokesVector::horizontal(), a)
                .unwrap()
                .mul(&PolUnitary::rotation_about(&StokesVector::diagonal(), b).unwrap())
                .mul(&PolUnitary::rotation_about(&StokesVector::horizontal(), c).unwrap());
            assert!(rebuilt.rotation_distance(&target) < 1e-9);
        }
    }

    #[test]
    fn six_plates_cover_every_rotation() {
        // Coverage oracle: the exact Euler factorization yields settings
        // whose stack transform matches 1000 random targets.
        let mut rng = SimRng::new(33);
        let mut stack = WaveplateStack::new(DEFAULT_PHI_MAX);
        for _ in 0..1000 {
            let target = PolUnitary::random(&mut rng);
            let settings = WaveplateStack::settings_for(&target, DEFAULT_PHI_MAX).unwrap();
            stack.set_retardances(settings).unwrap();
            let achieved = stack.unitary().unwrap();
            let angle = achieved.rotation_distance(&target);
            // Worst-case probe infidelity of the mismatch is sin²(angle/2).
            let infidelity = (0.5 * angle).sin().powi(2);
            assert!(infidelity < 1e-6, "infidelity {infidelity}");
        }
    }
}
