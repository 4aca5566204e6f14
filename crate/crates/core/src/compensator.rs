//! Polarization stabilization: the exact two-rotation compensator and the
//! intensity-maximizing feedback controller.
//!
//! The algebra: if a first rotation `r1` returns the fiber output of
//! reference SOP `s1` to `s1`, then `r1 · u_f` fixes `s1` and is therefore
//! a rotation about the `s1` axis. A second rotation `r3` about that very
//! axis can cancel it without disturbing `s1`, chosen so the second
//! reference `s3` is restored too. Two fixed non-collinear points force
//! the whole sphere: `r3 · r1 · u_f` is the identity rotation, i.e.
//! `r3 · r1 = u_f⁻¹` up to global phase, and every SOP is recovered, not
//! just the references.
//!
//! The feedback controller knows none of this algebra. It sees two
//! photodiode intensities and climbs their sum with a simultaneous
//! ±dither on all six plates (two probe evaluations per iteration, each
//! consuming one control period of simulated time). For non-collinear
//! references the objective's unique maximum is the exact compensator, so
//! the dumb loop converges to the smart answer.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::stokes::StokesVector;
use crate::unitary::PolUnitary;
use crate::waveplate::{WaveplateStack, PLATE_COUNT};

/// Exact compensator for a channel seen identically by both references.
///
/// Returns `(r1, r3)` with `r3 · r1 · u_f` equal to the identity rotation.
/// Collinear references (|s1·s3| within 1e-6 of 1) are rejected: rotations
/// about the shared axis would be invisible to both.
pub fn compensator_exact(
    u_f: &PolUnitary,
    s1: &StokesVector,
    s3: &StokesVector,
) -> Result<(PolUnitary, PolUnitary)> {
    compensator_exact_split(u_f, u_f, s1, s3)
}

/// Exact compensator when the two references see different transforms
/// (wavelength-split channels). `r1` exactly restores `s1` through
/// `u_for_s1`; `r3` rotates about the `s1` axis to best restore `s3`
/// through `u_for_s3`. When `u_for_s1 == u_for_s3` the composition is the
/// exact inverse; otherwise it is the two-reference lock with an
/// `O((τΔω)²)` residual at the quantum wavelength.
pub fn compensator_exact_split(
    u_for_s1: &PolUnitary,
    u_for_s3: &PolUnitary,
    s1: &StokesVector,
    s3: &StokesVector,
) -> Result<(PolUnitary, PolUnitary)> {
    s1.validate_unit()?;
    s3.validate_unit()?;
    let dot = s1.dot(s3);
    if dot.abs() >= 1.0 - 1e-6 {
        return Err(Error::DegenerateReferences(dot.abs()));
    }

    // Tie-break for the (measure-zero) antipodal case of rotation_between:
    // any axis perpendicular to s1 works; the s3 component is deterministic
    // and guaranteed non-parallel by the collinearity check.
    let tie_break = s3.perp_to(s1).normalized()?;
    let s1_out = u_for_s1.rotate(s1);
    let r1 = PolUnitary::rotation_between_with_axis(&s1_out, s1, &tie_break)?;

    // After r1 the channel fixes s1; align the azimuth of s3 about the s1
    // axis.
    let w = r1.rotate(&u_for_s3.rotate(s3));
    let w_perp = w.perp_to(s1);
    let t_perp = s3.perp_to(s1);
    let r3 = if w_perp.norm() < 1e-12 {
        // s3 mapped onto the s1 axis itself; nothing an s1 rotation can do.
        PolUnitary::identity()
    } else {
        let beta = s1.dot(&w_perp.cross(&t_perp)).atan2(w_perp.dot(&t_perp));
        PolUnitary::rotation_about(s1, beta)?
    };
    Ok((r1, r3))
}

#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub dither_rad: f64,
    pub step_gain: f64,
    /// Per-iteration relative pull of every retardance toward zero. The
    /// six-plate stack is redundant (six knobs, three degrees of freedom),
    /// so without a leak the plates diffuse along the objective's flat
    /// directions until they saturate; a weak leak parks the stack at the
    /// minimum-norm solution at a negligible alignment cost.
    pub retardance_leak: f64,
    pub phi_max_rad: f64,
    /// Starting retardances. A generic (non-zero) point keeps the plate
    /// Jacobian full rank from the first iteration; all-zero starts sit on
    /// a rank-deficient slice of the parameterization.
    pub initial_retardances: [f64; PLATE_COUNT],
    pub history_len: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            dither_rad: 0.05,
            step_gain: 0.2,
            retardance_leak: 1e-3,
            phi_max_rad: crate::waveplate::DEFAULT_PHI_MAX,
            initial_retardances: [0.4, -0.3, 0.25, 0.5, -0.35, 0.2],
            history_len: 64,
        }
    }
}

/// Feedback controller state: the waveplate stack plus the dithering
/// gradient climber that drives it.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub stack: WaveplateStack,
    pub dither_amplitude: f64,
    pub step_gain: f64,
    pub retardance_leak: f64,
    pub objective_history: VecDeque<f64>,
    pub resets: u64,
    history_len: usize,
    rng: SimRng,
}

impl ControllerState {
    pub fn new(cfg: &ControllerConfig, rng: SimRng) -> Self {
        let mut stack = WaveplateStack::new(cfg.phi_max_rad);
        stack
            .set_retardances(stack.clamped(cfg.initial_retardances))
            .expect("clamped settings are in bounds");
        Self {
            stack,
            dither_amplitude: cfg.dither_rad,
            step_gain: cfg.step_gain,
            retardance_leak: cfg.retardance_leak,
            objective_history: VecDeque::with_capacity(cfg.history_len),
            resets: 0,
            history_len: cfg.history_len,
            rng,
        }
    }

    /// One feedback iteration: a simultaneous random ±dither on all six
    /// plates, two probe evaluations of the summed reference intensities,
    /// and a gradient-ascent update. The probe callable maps trial
    /// retardances to `(I1, I3)` and advances simulated time by one
    /// control period per evaluation. Returns the iteration's objective
    /// estimate `(J⁺ + J⁻)/2`.
    pub fn control_step<F>(&mut self, mut probe: F) -> f64
    where
        F: FnMut(&[f64; PLATE_COUNT]) -> (f64, f64),
    {
        let mut signs = [0.0; PLATE_COUNT];
        for s in &mut signs {
            *s = if self.rng.bool() { 1.0 } else { -1.0 };
        }
        let base = self.stack.retardances();
        let d = self.dither_amplitude;

        let mut up = base;
        let mut dn = base;
        for i in 0..PLATE_COUNT {
            up[i] += d * signs[i];
            dn[i] -= d * signs[i];
        }
        let up = self.stack.clamped(up);
        let dn = self.stack.clamped(dn);

        let (i1p, i3p) = probe(&up);
        let j_plus = i1p + i3p;
        let (i1m, i3m) = probe(&dn);
        let j_minus = i1m + i3m;

        let scale = self.step_gain * (j_plus - j_minus) / (2.0 * d);
        let mut next = base;
        for i in 0..PLATE_COUNT {
            next[i] = (next[i] + scale * signs[i]) * (1.0 - self.retardance_leak);
        }
        let next = self.stack.clamped(next);
        self.stack
            .set_retardances(next)
            .expect("clamped settings are in bounds");

        let estimate = 0.5 * (j_plus + j_minus);
        if self.objective_history.len() == self.history_len {
            self.objective_history.pop_front();
        }
        self.objective_history.push_back(estimate);

        if self.saturated() {
            self.reset_stack();
        }
        estimate
    }

    /// True when all six plates sit within one dither amplitude of the
    /// same bound: the stack has run out of room in that direction.
    fn saturated(&self) -> bool {
        let r = self.stack.retardances();
        let hi = self.stack.phi_max() - self.dither_amplitude;
        r.iter().all(|&phi| phi >= hi) || r.iter().all(|&phi| phi <= -hi)
    }

    /// Rewind saturated plates to 2π-equivalent interior settings where
    /// possible (same Stokes action, so the channel never notices). If no
    /// equivalent interior setting exists the stack is zeroed, a hard
    /// reset that disturbs the channel briefly, and the reset counter is
    /// incremented.
    pub fn reset_stack(&mut self) {
        let phi_max = self.stack.phi_max();
        let margin = self.dither_amplitude;
        let mut r = self.stack.retardances();
        for phi in &mut r {
            if phi.abs() > std::f64::consts::PI {
                let unwrapped = *phi - std::f64::consts::TAU * phi.signum();
                if unwrapped.abs() <= phi_max - margin {
                    *phi = unwrapped;
                }
            }
        }
        let interior = r.iter().all(|&phi| phi.abs() <= phi_max - margin);
        if interior {
            self.stack
                .set_retardances(r)
                .expect("unwrapped settings are in bounds");
        } else {
            self.hard_reset();
        }
    }

    /// Zero every plate and count the reset.
    pub fn hard_reset(&mut self) {
        self.stack
            .set_retardances([0.0; PLATE_COUNT])
            .expect("zero is in bounds");
        self.resets += 1;
    }
}
