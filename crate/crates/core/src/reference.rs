//! Classical reference channels for the feedback loop.
//!
//! Two CW side channels bracket the quantum wavelength on the DWDM grid,
//! each launched in a fixed SOP. At the receiver they pass linear
//! polarizers aligned to the launch SOPs (a one-time calibration) and are
//! read by p-i-n photodiodes. The periodic dark slot blanking the lasers
//! around each quantum pulse is invisible here: the photodiode chain is
//! low-pass filtered.

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::stokes::StokesVector;
use crate::unitary::PolUnitary;

pub const DEFAULT_COLLINEARITY_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct ReferenceChannel {
    /// Angular-frequency offset from the quantum wavelength, rad/s.
    pub wavelength_offset_rad_per_s: f64,
    pub launch_sop: StokesVector,
    pub analyzer_sop: StokesVector,
    pub power_dbm: f64,
    /// RMS photodiode noise, relative intensity units.
    pub photodiode_noise_rms: f64,
}

impl ReferenceChannel {
    pub fn new(wavelength_offset_rad_per_s: f64, launch_sop: StokesVector) -> Self {
        Self {
            wavelength_offset_rad_per_s,
            launch_sop,
            analyzer_sop: launch_sop,
            power_dbm: -7.4,
            photodiode_noise_rms: 0.0,
        }
    }

    /// Normalized photodiode intensity after propagating the launch SOP
    /// through `total` (the channel evaluated at this reference's
    /// wavelength) and projecting on the analyzer.
    pub fn measure(&self, total: &PolUnitary, rng: &mut SimRng) -> f64 {
        let out = total.rotate(&self.launch_sop);
        let mut intensity = 0.5 * (1.0 + out.dot(&self.analyzer_sop));
        if self.photodiode_noise_rms > 0.0 {
            intensity += self.photodiode_noise_rms * rng.normal();
        }
        intensity.clamp(0.0, 1.0)
    }
}

/// The two reference channels plus the validation threshold guarding the
/// scheme's one failure mode: launch SOPs (nearly) on the same axis.
#[derive(Debug, Clone)]
pub struct ReferencePair {
    pub plus: ReferenceChannel,
    pub minus: ReferenceChannel,
    pub collinearity_threshold: f64,
}

impl ReferencePair {
    pub fn new(plus: ReferenceChannel, minus: ReferenceChannel) -> Self {
        Self {
            plus,
            minus,
            collinearity_threshold: DEFAULT_COLLINEARITY_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for ch in [&self.plus, &self.minus] {
            ch.launch_sop.validate_unit()?;
            ch.analyzer_sop.validate_unit()?;
            if !ch.analyzer_sop.approx_eq(&ch.launch_sop, 1e-9) {
                return Err(Error::Config(
                    "analyzer SOP must match the launch SOP (alignment calibration)".into(),
                ));
            }
        }
        if self.plus.wavelength_offset_rad_per_s < 0.0
            || self.minus.wavelength_offset_rad_per_s > 0.0
        {
            return Err(Error::Config(
                "reference offsets must bracket the quantum wavelength (one >= 0, one <= 0)"
                    .into(),
            ));
        }
        let dot = self.plus.launch_sop.dot(&self.minus.launch_sop).abs();
        if dot >= self.collinearity_threshold {
            return Err(Error::DegenerateReferences(dot));
        }
        Ok(())
    }
}

impl Default for ReferencePair {
    /// Perpendicular Poincaré axes at ±100 GHz (the adjacent DWDM slots).
    fn default() -> Self {
        let dw = std::f64::consts::TAU * 100e9;
        Self::new(
            ReferenceChannel::new(dw, StokesVector::horizontal()),
            ReferenceChannel::new(-dw, StokesVector::diagonal()),
        )
    }
}
