//! Spontaneous-Raman side-channel noise, interpolated from a measured
//! curve.
//!
//! Table file format: plain text, one `delta_lambda_nm, probability` pair
//! per line, `#` comments. Probabilities are per 1 ns gate at 1 mW of
//! side-channel power; the spontaneous process is linear in both, so the
//! lookup scales accordingly.

use std::path::Path;

use crate::error::{Error, Result};

/// Measured count-probability curve versus wavelength separation.
#[derive(Debug, Clone)]
pub struct RamanTable {
    /// Sorted `(delta_lambda_nm, probability_per_ns_gate_at_1mW)` samples.
    points: Vec<(f64, f64)>,
}

impl RamanTable {
    /// The sample table bundled with the crate (approximate digitization of
    /// a measured curve; see `data/raman_sideband.txt`).
    pub fn bundled() -> Self {
        Self::parse(include_str!("../data/raman_sideband.txt"))
            .expect("bundled table parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (a, b) = (parts.next(), parts.next());
            match (a, b) {
                (Some(a), Some(b)) => {
                    let dl: f64 = a.parse().map_err(|_| {
                        Error::TableParse(format!("line {}: bad number '{a}'", lineno + 1))
                    })?;
                    let p: f64 = b.parse().map_err(|_| {
                        Error::TableParse(format!("line {}: bad number '{b}'", lineno + 1))
                    })?;
                    if p < 0.0 {
                        return Err(Error::TableParse(format!(
                            "line {}: negative probability {p}",
                            lineno + 1
                        )));
                    }
                    points.push((dl, p));
                }
                _ => {
                    return Err(Error::TableParse(format!(
                        "line {}: expected 'delta_lambda_nm, probability'",
                        lineno + 1
                    )))
                }
            }
        }
        if points.len() < 2 {
            return Err(Error::TableParse("need at least two samples".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { points })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Linear interpolation at `delta_lambda_nm`; out-of-domain offsets are
    /// an error rather than an extrapolation.
    pub fn interpolate(&self, delta_lambda_nm: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if delta_lambda_nm < lo || delta_lambda_nm > hi {
            return Err(Error::TableDomain(delta_lambda_nm, lo, hi));
        }
        let idx = self
            .points
            .windows(2)
            .position(|w| delta_lambda_nm <= w[1].0)
            .unwrap_or(self.points.len() - 2);
        let (x0, y0) = self.points[idx];
        let (x1, y1) = self.points[idx + 1];
        if (x1 - x0).abs() < 1e-12 {
            return Ok(y0);
        }
        let f = (delta_lambda_nm - x0) / (x1 - x0);
        Ok(y0 + f * (y1 - y0))
    }
}

/// Count probability per detection gate from side-channel Raman noise at
/// the given wavelength separation, side power, and gate width.
pub fn raman_noise_probability(
    table: &RamanTable,
    delta_lambda_nm: f64,
    side_power_mw: f64,
    gate_ns: f64,
) -> Result<f64> {
    if side_power_mw < 0.0 {
        return Err(Error::OutOfRange {
            name: "side_power_mw",
            value: side_power_mw,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    if gate_ns <= 0.0 {
        return Err(Error::OutOfRange {
            name: "gate_ns",
            value: gate_ns,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    Ok(table.interpolate(delta_lambda_nm)? * side_power_mw * gate_ns)
}
