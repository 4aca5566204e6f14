//! Polarization-drift compensation on a fiber quantum channel, simulated
//! end to end.
//!
//! The library models a wavelength-multiplexed link in which two classical
//! reference channels bracket a single-photon channel on the DWDM grid.
//! Linear polarizers and photodiodes at the receiver turn the reference
//! SOPs into intensities; a feedback controller drives a six-waveplate
//! compensator to maximize both intensities at once, which (for
//! non-collinear references) forces the compensator to invert the fiber's
//! birefringence for every polarization state. On top of the stabilized
//! channel a polarization-encoded BB84 session is simulated, with the
//! sifted-key error rate decomposed into optical, detector, and
//! side-channel shares.
//!
//! Modules, bottom up:
//!
//! * [`stokes`], [`jones`], [`unitary`]: exact polarization algebra.
//! * [`fiber`], [`raman`]: the time-evolving channel with birefringence
//!   drift, first-order PMD, a piezo scrambler, loss budgets, and
//!   side-channel noise data.
//! * [`waveplate`], [`mod@reference`], [`compensator`]: the stabilization
//!   subsystem, from the bounded retarder stack and the reference
//!   measurements to the exact algebraic compensator and the
//!   intensity-maximizing control loop.
//! * [`bb84`]: pulse-level transmitter/receiver and QBER accounting.
//! * [`scenario`], [`engine`]: named experiment presets and the
//!   deterministic time-stepped simulation driver.
//! * [`config`]: the sectioned key-value text format used by the CLI.
//!
//! # Example
//!
//! Run a short scrambled link with the feedback loop active and read the
//! aggregate error budget:
//!
//! ```
//! use polstab_core::engine::run_scenario;
//! use polstab_core::scenario::{scenario_static, SimMode};
//!
//! let mut cfg = scenario_static();
//! cfg.mode = SimMode::Analytic;
//! cfg.duration_s = 0.4;
//! cfg.report_interval_pulses = 1_000_000;
//! cfg.control_enabled = true;
//! cfg.scrambler.enabled = true;
//! cfg.scrambler.frequency_hz = 2.0;
//! cfg.fiber.initial = polstab_core::fiber::InitialAlignment::Random;
//!
//! let result = run_scenario(&cfg).unwrap();
//! assert_eq!(result.points.len(), 2);
//! // The loop holds the scrambled channel near the quiet-link budget.
//! assert!(result.totals.qber_total() < 0.05);
//! ```

pub mod bb84;
pub mod compensator;
pub mod config;
pub mod engine;
pub mod error;
pub mod fiber;
pub mod jones;
pub mod raman;
pub mod reference;
pub mod rng;
pub mod scenario;
pub mod stokes;
pub mod unitary;
pub mod waveplate;

pub use error::{Error, Result};
pub use jones::{fidelity, qber_from_visibility, sop_equal, stokes_from_jones, JonesVector};
pub use rng::SimRng;
pub use stokes::StokesVector;
pub use unitary::{rotation_about, rotation_between, PolUnitary};
