//! Time-evolving fiber channel: birefringence drift, first-order PMD,
//! a deterministic piezo scrambler, and the link power budget.
//!
//! The channel is described by a special-unitary transform `u_ref` at the
//! quantum wavelength plus a PMD vector whose magnitude is the
//! differential group delay. Away from the reference wavelength the
//! transform picks up an extra rotation about the PMD axis by
//! `|τ|·Δω`, the first-order expansion that is accurate while
//! `|τ|·Δω ≪ 1`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::stokes::StokesVector;
use crate::unitary::PolUnitary;

/// Mean-reversion rate (1/s) of the DGD magnitude walk.
const DGD_REVERSION_RATE: f64 = 1.0;
/// Relative noise strength of the DGD magnitude walk (per √s).
const DGD_NOISE_FRACTION: f64 = 0.2;

/// How the channel transform starts out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialAlignment {
    /// Identity transform: a link calibrated right before the run.
    Aligned,
    /// Haar-random transform drawn from the channel's seed.
    Random,
}

#[derive(Debug, Clone)]
pub struct FiberConfig {
    /// Mean differential group delay, seconds.
    pub mean_dgd_s: f64,
    /// Expected great-circle speed of a probe SOP, rad/s.
    pub drift_rate_rad_per_s: f64,
    /// Fiber loss, dB.
    pub loss_db: f64,
    pub initial: InitialAlignment,
}

impl Default for FiberConfig {
    fn default() -> Self {
        Self {
            mean_dgd_s: 0.28e-12,
            drift_rate_rad_per_s: 0.0,
            loss_db: 4.3,
            initial: InitialAlignment::Aligned,
        }
    }
}

/// Transform at a wavelength offset, flagged when the requested offset is
/// outside the first-order PMD regime.
#[derive(Debug, Clone, Copy)]
pub struct WavelengthResponse {
    pub unitary: PolUnitary,
    /// True while `|τ|·|Δω| < 1`; the value is still returned otherwise,
    /// but the first-order expansion behind it is no longer trustworthy.
    pub within_first_order: bool,
}

#[derive(Debug, Clone)]
pub struct FiberChannelState {
    u_ref: PolUnitary,
    /// PMD vector in Stokes space; magnitude is the DGD in seconds.
    pmd: StokesVector,
    mean_dgd_s: f64,
    drift_rate: f64,
    pub loss_db: f64,
    rng: SimRng,
}

impl FiberChannelState {
    pub fn new(cfg: &FiberConfig, seed: u64) -> Self {
        Self::with_rng(cfg, SimRng::new(seed))
    }

    pub fn with_rng(cfg: &FiberConfig, mut rng: SimRng) -> Self {
        let u_ref = match cfg.initial {
            InitialAlignment::Aligned => PolUnitary::identity(),
            InitialAlignment::Random => PolUnitary::random(&mut rng),
        };
        let pmd = StokesVector::random(&mut rng).scale(cfg.mean_dgd_s);
        Self {
            u_ref,
            pmd,
            mean_dgd_s: cfg.mean_dgd_s,
            drift_rate: cfg.drift_rate_rad_per_s,
            loss_db: cfg.loss_db,
            rng,
        }
    }

    pub fn unitary(&self) -> PolUnitary {
        self.u_ref
    }

    pub fn dgd_s(&self) -> f64 {
        self.pmd.norm()
    }

    pub fn pmd_vector(&self) -> StokesVector {
        self.pmd
    }

    pub fn drift_rate(&self) -> f64 {
        self.drift_rate
    }

    pub fn set_drift_rate(&mut self, rate: f64) {
        self.drift_rate = rate;
    }

    /// Advance the channel by `dt` seconds.
    ///
    /// The transform is multiplied by a small rotation about an isotropic
    /// random axis. The step angle carries a 4/π factor so that the
    /// *expected* great-circle displacement of a probe SOP per unit time
    /// equals `drift_rate` (an isotropic axis sees the probe at a random
    /// inclination whose mean sine is π/4). The DGD magnitude follows a
    /// mean-reverting walk around the configured mean, and the PMD axis
    /// wanders at the same angular rate as the birefringence.
    pub fn step(&mut self, dt: f64) {
        assert!(dt > 0.0, "step requires dt > 0");
        if self.drift_rate > 0.0 {
            let axis = StokesVector::random(&mut self.rng);
            let angle = self.drift_rate * dt * (4.0 / PI);
            let kick = PolUnitary::rotation_about(&axis, angle).expect("unit axis");
            self.u_ref = kick.mul(&self.u_ref).renormalized();

            let pmd_axis = StokesVector::random(&mut self.rng);
            let pmd_kick =
                PolUnitary::rotation_about(&pmd_axis, self.drift_rate * dt).expect("unit axis");
            self.pmd = pmd_kick.rotate(&self.pmd);
        }

        if self.mean_dgd_s > 0.0 {
            let m = self.pmd.norm();
            let noise = DGD_NOISE_FRACTION * self.mean_dgd_s * dt.sqrt() * self.rng.normal();
            let m_new =
                (m + DGD_REVERSION_RATE * (self.mean_dgd_s - m) * dt + noise).max(0.0);
            if m > 1e-30 {
                self.pmd = self.pmd.scale(m_new / m);
            } else {
                self.pmd = StokesVector::random(&mut self.rng).scale(m_new);
            }
        }
    }

    /// Channel transform at angular-frequency offset `delta_omega` (rad/s)
    /// from the quantum wavelength: a rotation about the PMD axis by
    /// `|τ|·Δω` composed after `u_ref`. Zero offset returns `u_ref`
    /// exactly; zero PMD is wavelength-flat.
    pub fn unitary_at_wavelength(&self, delta_omega: f64) -> WavelengthResponse {
        let tau = self.pmd.norm();
        let within_first_order = tau * delta_omega.abs() < 1.0;
        if delta_omega == 0.0 || tau < 1e-30 {
            return WavelengthResponse {
                unitary: self.u_ref,
                within_first_order,
            };
        }
        let axis = self.pmd.scale(1.0 / tau);
        let pmd_rot =
            PolUnitary::rotation_about(&axis, tau * delta_omega).expect("unit axis");
        WavelengthResponse {
            unitary: pmd_rot.mul(&self.u_ref),
            within_first_order,
        }
    }
}

/// Three piezo actuators sweeping triangle-wave rotations on the
/// Poincaré sphere.
///
/// Each actuator's rotation angle spans 2π back and forth per its own ramp
/// period. The three ramps run at one third of the nominal scrambling
/// frequency so the summed sweep rate follows the 4π rad/s per hertz
/// convention: at 1 Hz the three actuators together rotate polarization by
/// 4π per second.
#[derive(Debug, Clone)]
pub struct ScramblerState {
    pub axes: [StokesVector; 3],
    pub ramp_frequency_hz: f64,
    /// Per-actuator ramp phase, radians of ramp cycle (2π = one period).
    pub phases: [f64; 3],
    pub enabled: bool,
}

impl ScramblerState {
    pub fn new(ramp_frequency_hz: f64) -> Self {
        Self {
            axes: [
                StokesVector::horizontal(),
                StokesVector::diagonal(),
                StokesVector::right_circular(),
            ],
            ramp_frequency_hz,
            phases: [0.0; 3],
            enabled: true,
        }
    }

    pub fn disabled() -> Self {
        let mut s = Self::new(0.0);
        s.enabled = false;
        s
    }

    /// Total sweep rate across the three actuators, rad/s.
    pub fn rotation_rate(&self) -> f64 {
        4.0 * PI * self.ramp_frequency_hz
    }

    /// Pattern period: each actuator ramps at `frequency/3`.
    pub fn period_s(&self) -> f64 {
        3.0 / self.ramp_frequency_hz
    }

    fn actuator_angle(&self, i: usize, t: f64) -> f64 {
        let f_act = self.ramp_frequency_hz / 3.0;
        let cycles = f_act * t + self.phases[i] / TAU;
        let x = cycles - cycles.floor();
        if x < 0.5 {
            TAU * (2.0 * x)
        } else {
            TAU * (2.0 * (1.0 - x))
        }
    }

    /// Scrambler transform at time `t`; identity when disabled.
    pub fn unitary_at(&self, t: f64) -> PolUnitary {
        if !self.enabled {
            return PolUnitary::identity();
        }
        let mut u = PolUnitary::identity();
        for i in 0..3 {
            let angle = self.actuator_angle(i, t);
            let r = PolUnitary::rotation_about(&self.axes[i], angle).expect("unit axis");
            u = r.mul(&u);
        }
        u
    }
}

/// Link power budget for the quantum path, all entries in dB.
#[derive(Debug, Clone)]
pub struct ChannelBudget {
    pub fiber_loss_db: f64,
    pub mux_insertion_db: f64,
    pub demux_insertion_db: f64,
    pub bpf_insertion_db: f64,
    /// Suppression of an adjacent DWDM channel, positive dB.
    pub adjacent_extinction_db: f64,
    /// Suppression of a non-adjacent DWDM channel, positive dB.
    pub nonadjacent_extinction_db: f64,
}

impl Default for ChannelBudget {
    fn default() -> Self {
        Self {
            fiber_loss_db: 4.3,
            mux_insertion_db: 1.4,
            demux_insertion_db: 1.4,
            bpf_insertion_db: 1.4,
            adjacent_extinction_db: 35.0,
            nonadjacent_extinction_db: 45.0,
        }
    }
}

impl ChannelBudget {
    pub fn total_db(&self) -> f64 {
        self.fiber_loss_db + self.mux_insertion_db + self.demux_insertion_db + self.bpf_insertion_db
    }

    pub fn validate(&self) -> Result<()> {
        for v in [
            self.fiber_loss_db,
            self.mux_insertion_db,
            self.demux_insertion_db,
            self.bpf_insertion_db,
            self.adjacent_extinction_db,
            self.nonadjacent_extinction_db,
        ] {
            if v < 0.0 {
                return Err(Error::NegativeLoss(v));
            }
        }
        Ok(())
    }
}

/// Linear power transmission of the quantum path.
pub fn channel_transmission(budget: &ChannelBudget) -> Result<f64> {
    budget.validate()?;
    Ok(10f64.powf(-budget.total_db() / 10.0))
}

/// Duty cycle of the reference channels given the dark slot blanked around
/// each quantum pulse: `1 - slot·rate`.
pub fn dark_slot_duty_cycle(slot_ns: f64, rep_rate_hz: f64) -> Result<f64> {
    if slot_ns < 0.0 || rep_rate_hz <= 0.0 {
        return Err(Error::OutOfRange {
            name: "dark_slot",
            value: slot_ns,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let period_ns = 1e9 / rep_rate_hz;
    if slot_ns >= period_ns {
        return Err(Error::SlotExceedsPeriod(slot_ns, period_ns));
    }
    Ok(1.0 - slot_ns * rep_rate_hz * 1e-9)
}
