//! Special-unitary polarization transforms and their Poincaré-sphere action.
//!
//! A `PolUnitary` is stored as a unit quaternion `(w, x, y, z)`. The
//! corresponding Jones-space operator (det = +1, global phase fixed) is
//!
//! ```text
//! U = w·I - i·(x·τ₁ + y·τ₂ + z·τ₃)
//! ```
//!
//! where `(τ₁, τ₂, τ₃) = (σ_z, σ_x, σ_y)` is the Pauli triple reordered to
//! match the Stokes axes of this crate (s1 = horizontal/vertical,
//! s2 = diagonal, s3 = circular). Acting on Jones space is then exactly a
//! right-handed rotation of Stokes space about the quaternion's vector
//! part, which keeps all sphere geometry in plain 3-vector arithmetic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jones::JonesVector;
use crate::rng::SimRng;
use crate::stokes::StokesVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolUnitary {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl PolUnitary {
    pub fn identity() -> Self {
        Self {
            w: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    /// Rotation by `angle` (right-hand rule) about a Poincaré-sphere axis.
    /// The axis is normalized; a zero axis is rejected.
    pub fn rotation_about(axis: &StokesVector, angle: f64) -> Result<Self> {
        let n = axis.normalized()?;
        let (s, w) = (0.5 * angle).sin_cos();
        Ok(Self {
            w,
            x: s * n.s1,
            y: s * n.s2,
            z: s * n.s3,
        })
    }

    /// The rotation taking unit vector `a` onto unit vector `b` about the
    /// axis `a × b` (the minimal-angle choice). Antipodal inputs have no
    /// unique axis and are rejected; see
    /// [`PolUnitary::rotation_between_with_axis`].
    pub fn rotation_between(a: &StokesVector, b: &StokesVector) -> Result<Self> {
        a.validate_unit()?;
        b.validate_unit()?;
        let dot = a.dot(b);
        if 1.0 + dot < 1e-12 {
            return Err(Error::AmbiguousAxis);
        }
        // Half-angle construction: w = cos(θ/2), vector = a×b / (2w).
        let w = (0.5 * (1.0 + dot)).sqrt();
        let c = a.cross(b).scale(1.0 / (2.0 * w));
        Ok(Self {
            w,
            x: c.s1,
            y: c.s2,
            z: c.s3,
        }
        .renormalized())
    }

    /// Like [`PolUnitary::rotation_between`], but resolves the antipodal
    /// degeneracy with an explicit tie-break axis (any direction not
    /// parallel to `a`; its component perpendicular to `a` is used as the
    /// π-rotation axis).
    pub fn rotation_between_with_axis(
        a: &StokesVector,
        b: &StokesVector,
        tie_break: &StokesVector,
    ) -> Result<Self> {
        a.validate_unit()?;
        b.validate_unit()?;
        if 1.0 + a.dot(b) >= 1e-12 {
            return Self::rotation_between(a, b);
        }
        let axis = tie_break.perp_to(a).normalized().map_err(|_| Error::ZeroAxis)?;
        Self::rotation_about(&axis, std::f64::consts::PI)
    }

    /// Matrix product `self · rhs`: the transform applying `rhs` first.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            w: self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            x: self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            y: self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            z: self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Rotate a Stokes vector: `v + 2w(q×v) + 2q×(q×v)`.
    pub fn rotate(&self, v: &StokesVector) -> StokesVector {
        let q = StokesVector::new(self.x, self.y, self.z);
        let t = q.cross(v);
        v.add(&t.scale(2.0 * self.w)).add(&q.cross(&t).scale(2.0))
    }

    /// Apply in Jones space.
    pub fn apply_jones(&self, j: &JonesVector) -> JonesVector {
        let m = self.jones_matrix();
        JonesVector::new(
            m[0][0] * j.a0 + m[0][1] * j.a1,
            m[1][0] * j.a0 + m[1][1] * j.a1,
        )
    }

    /// The det = +1 Jones matrix of this transform.
    pub fn jones_matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(self.w, -self.x),
                Complex64::new(-self.z, -self.y),
            ],
            [
                Complex64::new(self.z, -self.y),
                Complex64::new(self.w, self.x),
            ],
        ]
    }

    /// SO(3) rotation matrix of the Stokes action (row-major).
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let e1 = self.rotate(&StokesVector::new(1.0, 0.0, 0.0));
        let e2 = self.rotate(&StokesVector::new(0.0, 1.0, 0.0));
        let e3 = self.rotate(&StokesVector::new(0.0, 0.0, 1.0));
        [
            [e1.s1, e2.s1, e3.s1],
            [e1.s2, e2.s2, e3.s2],
            [e1.s3, e2.s3, e3.s3],
        ]
    }

    /// Canonical axis-angle form of the Stokes rotation, with angle in
    /// `[0, π]`. The identity reports the circular axis and zero angle.
    pub fn axis_angle(&self) -> (StokesVector, f64) {
        let v = StokesVector::new(self.x, self.y, self.z);
        let vn = v.norm();
        if vn < 1e-15 {
            return (StokesVector::right_circular(), 0.0);
        }
        let angle = 2.0 * vn.atan2(self.w.abs());
        let axis = if self.w < 0.0 { v.scale(-1.0 / vn) } else { v.scale(1.0 / vn) };
        (axis, angle)
    }

    /// Rotation angle away from the identity, in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        self.axis_angle().1
    }

    /// Angle between the Stokes actions of two transforms (global phase
    /// ignored), in `[0, π]`.
    pub fn rotation_distance(&self, other: &Self) -> f64 {
        self.mul(&other.inverse()).rotation_angle()
    }

    /// Quaternion norm error; zero for a properly normalized transform.
    pub fn norm_error(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt() - 1.0
    }

    pub fn renormalized(&self) -> Self {
        let n = (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        if n < 1e-30 {
            return Self::identity();
        }
        Self {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// Haar-ish random rotation (uniform unit quaternion).
    pub fn random(rng: &mut SimRng) -> Self {
        loop {
            let q = Self {
                w: rng.normal(),
                x: rng.normal(),
                y: rng.normal(),
                z: rng.normal(),
            };
            let n = (q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z).sqrt();
            if n > 1e-6 {
                return Self {
                    w: q.w / n,
                    x: q.x / n,
                    y: q.y / n,
                    z: q.z / n,
                };
            }
        }
    }
}

/// Validated wrapper matching the library's operation vocabulary.
pub fn rotation_about(axis: &StokesVector, angle: f64) -> Result<PolUnitary> {
    PolUnitary::rotation_about(axis, angle)
}

/// Validated wrapper matching the library's operation vocabulary.
pub fn rotation_between(a: &StokesVector, b: &StokesVector) -> Result<PolUnitary> {
    PolUnitary::rotation_between(a, b)
}
