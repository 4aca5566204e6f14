//! Polarization-encoded BB84: pulse transmission, gated detection, basis
//! sifting, and QBER accounting.
//!
//! Alice prepares one of four SOPs from two conjugate great-circle bases
//! (H/V rectilinear, D/A diagonal) on weak coherent pulses of mean photon
//! number μ. Bob analyzes at a polarizing beam splitter with finite
//! extinction and gated single-photon counters. Every sifted error carries
//! a simulator-internal ground-truth cause (signal photon in the wrong
//! port, detector dark count, or side-channel noise), which is what lets
//! a run report the QBER decomposed into optical, detector, and
//! side-channel shares. A real receiver can only observe the total.

use std::io::Write;

use crate::error::{Error, Result};
use crate::jones::{fidelity, JonesVector};
use crate::rng::SimRng;
use crate::stokes::StokesVector;
use crate::unitary::PolUnitary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// H/V; bit 0 encodes H.
    Rectilinear,
    /// D/A; bit 0 encodes D.
    Diagonal,
}

impl Basis {
    /// Stokes axis of the basis' bit-0 port.
    pub fn port0_axis(&self) -> StokesVector {
        match self {
            Basis::Rectilinear => StokesVector::horizontal(),
            Basis::Diagonal => StokesVector::diagonal(),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Basis::Rectilinear => 0,
            Basis::Diagonal => 1,
        }
    }

    pub fn label(&self) -> char {
        match self {
            Basis::Rectilinear => 'R',
            Basis::Diagonal => 'D',
        }
    }
}

/// Ground-truth origin of a detection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cause {
    Signal,
    Dark,
    Side,
    None,
}

impl Cause {
    pub fn label(&self) -> &'static str {
        match self {
            Cause::Signal => "signal",
            Cause::Dark => "dark",
            Cause::Side => "side",
            Cause::None => "none",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceConfig {
    /// Mean photon number per pulse.
    pub mu: f64,
    pub rep_rate_hz: f64,
    /// The four alphabet states: [rect bit0, rect bit1, diag bit0, diag bit1].
    pub alphabet: [JonesVector; 4],
    /// RMS preparation misalignment, radians on the Poincaré sphere.
    pub modulator_error_rms: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            mu: 0.1,
            rep_rate_hz: 5e6,
            alphabet: default_alphabet(),
            modulator_error_rms: 0.0,
        }
    }
}

pub fn default_alphabet() -> [JonesVector; 4] {
    [
        JonesVector::horizontal(),
        JonesVector::vertical(),
        JonesVector::diagonal(),
        JonesVector::anti_diagonal(),
    ]
}

impl SourceConfig {
    pub fn state_for(&self, bit: bool, basis: Basis) -> JonesVector {
        self.alphabet[2 * basis.index() + bit as usize]
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu <= 0.0 {
            return Err(Error::OutOfRange {
                name: "mu",
                value: self.mu,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        if self.rep_rate_hz <= 0.0 {
            return Err(Error::OutOfRange {
                name: "rep_rate_hz",
                value: self.rep_rate_hz,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        for j in &self.alphabet {
            j.validate_normalized()?;
        }
        // Bases must be mutually unbiased: cross-basis fidelity 1/2.
        for a in 0..2 {
            for b in 2..4 {
                let f = fidelity(&self.alphabet[a], &self.alphabet[b]);
                if (f - 0.5).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "alphabet bases are not mutually unbiased (fidelity {f})"
                    )));
                }
            }
        }
        for (a, b) in [(0usize, 1usize), (2, 3)] {
            if fidelity(&self.alphabet[a], &self.alphabet[b]) > 1e-9 {
                return Err(Error::Config(
                    "alphabet states within a basis must be orthogonal".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Single-photon detection efficiency.
    pub efficiency: f64,
    /// Dark-count probability per gate, per detector.
    pub dark_count_prob: f64,
    pub gate_ns: f64,
    /// PBS extinction ratio, positive dB of wrong-port suppression.
    pub pbs_extinction_db: f64,
    /// Side-channel noise click probability per gate, per detector
    /// (residual Raman plus crosstalk).
    pub side_noise_prob: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency: 0.25,
            dark_count_prob: 1e-5,
            gate_ns: 1.0,
            pbs_extinction_db: 22.0,
            side_noise_prob: 0.0,
        }
    }
}

impl DetectorConfig {
    /// Wrong-port routing probability for a perfectly aligned photon:
    /// `ε/(1+ε)` with `ε = 10^(-extinction_dB/10)`.
    pub fn leakage(&self) -> f64 {
        let eps = 10f64.powf(-self.pbs_extinction_db / 10.0);
        eps / (1.0 + eps)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("efficiency", self.efficiency),
            ("dark_count_prob", self.dark_count_prob),
            ("side_noise_prob", self.side_noise_prob),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        if self.pbs_extinction_db <= 0.0 {
            return Err(Error::OutOfRange {
                name: "pbs_extinction_db",
                value: self.pbs_extinction_db,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        if self.gate_ns <= 0.0 {
            return Err(Error::OutOfRange {
                name: "gate_ns",
                value: self.gate_ns,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        Ok(())
    }
}

/// Everything the simulator knows about one pulse slot.
#[derive(Debug, Clone, Copy)]
pub struct PulseOutcome {
    pub alice_bit: bool,
    pub alice_basis: Basis,
    pub bob_basis: Basis,
    pub click0: bool,
    pub click1: bool,
    /// Bob's bit after double-click resolution (fair coin).
    pub bob_bit: bool,
    /// Ground-truth cause of the click behind `bob_bit`; `Cause::None`
    /// exactly when neither detector fired.
    pub cause: Cause,
}

impl PulseOutcome {
    pub fn clicked(&self) -> bool {
        self.click0 || self.click1
    }

    pub fn double_click(&self) -> bool {
        self.click0 && self.click1
    }

    pub fn sifted(&self) -> bool {
        self.clicked() && self.alice_basis == self.bob_basis
    }

    pub fn error(&self) -> bool {
        self.sifted() && self.bob_bit != self.alice_bit
    }
}

/// Draw one pulse from the source: Poisson photon number and the prepared
/// state of a random (bit, basis), perturbed by the modulator error.
pub fn transmit_pulse(src: &SourceConfig, rng: &mut SimRng) -> (u32, JonesVector, bool, Basis) {
    let bit = rng.bool();
    let basis = if rng.bool() {
        Basis::Diagonal
    } else {
        Basis::Rectilinear
    };
    let (n, prepared) = transmit_pulse_as(src, bit, basis, rng);
    (n, prepared, bit, basis)
}

/// Same as [`transmit_pulse`] with the (bit, basis) choice pinned; used
/// for single-state characterization runs.
pub fn transmit_pulse_as(
    src: &SourceConfig,
    bit: bool,
    basis: Basis,
    rng: &mut SimRng,
) -> (u32, JonesVector) {
    let n = rng.poisson(src.mu);
    let mut prepared = src.state_for(bit, basis);
    if src.modulator_error_rms > 0.0 {
        let axis = StokesVector::random(rng);
        let angle = src.modulator_error_rms * rng.normal();
        let kick = PolUnitary::rotation_about(&axis, angle).expect("unit axis");
        prepared = kick.apply_jones(&prepared);
    }
    (n, prepared)
}

/// Gated detection of one pulse.
///
/// Each photon independently survives the link with probability
/// `transmission · efficiency`, routes by the Malus projection on Bob's
/// basis, and leaks to the wrong PBS port with probability `ε/(1+ε)`.
/// Dark and side-channel clicks are added independently per detector.
/// Double clicks are resolved by a fair coin. When several sources fire
/// the same chosen port, the recorded cause prefers signal, then side,
/// then dark.
pub fn detect_pulse(
    photon_count: u32,
    arriving: &JonesVector,
    bob_basis: Basis,
    det: &DetectorConfig,
    transmission: f64,
    rng: &mut SimRng,
) -> PulseOutcome {
    debug_assert!(transmission > 0.0 && transmission <= 1.0);
    let mut sig = [false; 2];
    if photon_count > 0 {
        let s = arriving.stokes();
        let p0 = 0.5 * (1.0 + s.dot(&bob_basis.port0_axis()));
        let p_detect = transmission * det.efficiency;
        let mut leak = f64::NAN;
        for _ in 0..photon_count {
            if rng.f64() < p_detect {
                if leak.is_nan() {
                    leak = det.leakage();
                }
                let to_port0 = rng.f64() < p0;
                let leaked = leak > 0.0 && rng.f64() < leak;
                let port = usize::from(to_port0 == leaked);
                sig[port] = true;
            }
        }
    }
    let mut side = [false; 2];
    let mut dark = [false; 2];
    for port in 0..2 {
        if det.side_noise_prob > 0.0 && rng.f64() < det.side_noise_prob {
            side[port] = true;
        }
        if det.dark_count_prob > 0.0 && rng.f64() < det.dark_count_prob {
            dark[port] = true;
        }
    }

    let click = [
        sig[0] || side[0] || dark[0],
        sig[1] || side[1] || dark[1],
    ];
    let (bob_bit, cause) = match (click[0], click[1]) {
        (false, false) => (false, Cause::None),
        (true, false) => (false, port_cause(0, &sig, &side)),
        (false, true) => (true, port_cause(1, &sig, &side)),
        (true, true) => {
            let port = usize::from(rng.bool());
            (port == 1, port_cause(port, &sig, &side))
        }
    };

    PulseOutcome {
        alice_bit: false,
        alice_basis: Basis::Rectilinear,
        bob_basis,
        click0: click[0],
        click1: click[1],
        bob_bit,
        cause,
    }
}

fn port_cause(port: usize, sig: &[bool; 2], side: &[bool; 2]) -> Cause {
    if sig[port] {
        Cause::Signal
    } else if side[port] {
        Cause::Side
    } else {
        Cause::Dark
    }
}

/// Sifted-key error rates with the ground-truth decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberReport {
    pub qber_total: f64,
    pub qber_opt: f64,
    pub qber_det: f64,
    pub qber_side: f64,
    pub sifted_count: u64,
    pub sent_count: u64,
}

/// Streaming QBER accumulator; merging two accumulators is associative,
/// so disjoint pulse blocks can be scored independently and combined.
#[derive(Debug, Clone, Copy, Default)]
pub struct QberAccumulator {
    pub sent: u64,
    pub sifted: u64,
    pub err_opt: u64,
    pub err_det: u64,
    pub err_side: u64,
}

impl QberAccumulator {
    pub fn record(&mut self, outcome: &PulseOutcome) {
        self.sent += 1;
        if !outcome.sifted() {
            return;
        }
        self.sifted += 1;
        if outcome.error() {
            match outcome.cause {
                Cause::Signal => self.err_opt += 1,
                Cause::Dark => self.err_det += 1,
                Cause::Side => self.err_side += 1,
                Cause::None => unreachable!("sifted event without a click"),
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.sent += other.sent;
        self.sifted += other.sifted;
        self.err_opt += other.err_opt;
        self.err_det += other.err_det;
        self.err_side += other.err_side;
    }

    pub fn report(&self) -> Result<QberReport> {
        if self.sifted == 0 {
            return Err(Error::EmptySift);
        }
        let n = self.sifted as f64;
        let opt = self.err_opt as f64 / n;
        let det = self.err_det as f64 / n;
        let side = self.err_side as f64 / n;
        Ok(QberReport {
            qber_total: opt + det + side,
            qber_opt: opt,
            qber_det: det,
            qber_side: side,
            sifted_count: self.sifted,
            sent_count: self.sent,
        })
    }
}

/// Score a finished pulse stream: keep matching-basis clicked events and
/// classify errors by their ground-truth cause.
pub fn sift_and_score(outcomes: &[PulseOutcome]) -> Result<QberReport> {
    let mut acc = QberAccumulator::default();
    for o in outcomes {
        acc.record(o);
    }
    acc.report()
}

/// Expected optical error rate for a fixed residual channel transform:
/// the average over the four alphabet states, each measured in its own
/// basis, of `(1-F)·(1-λ) + F·λ`, with `F` the state's fidelity through
/// the residual and `λ` the wrong-port leakage probability.
pub fn expected_qber_opt(
    residual: &PolUnitary,
    alphabet: &[JonesVector; 4],
    leakage: f64,
) -> f64 {
    let mut sum = 0.0;
    for j in alphabet {
        let f = fidelity(j, &residual.apply_jones(j));
        sum += (1.0 - f) * (1.0 - leakage) + f * leakage;
    }
    sum / 4.0
}

/// Detection-log export: one row per sifted event.
pub fn write_detection_log<W: Write>(outcomes: &[PulseOutcome], mut w: W) -> Result<()> {
    writeln!(w, "pulse_index,alice_basis,alice_bit,bob_basis,bob_bit,cause")?;
    for (i, o) in outcomes.iter().enumerate() {
        if !o.sifted() {
            continue;
        }
        writeln!(
            w,
            "{},{},{},{},{},{}",
            i,
            o.alice_basis.label(),
            o.alice_bit as u8,
            o.bob_basis.label(),
            o.bob_bit as u8,
            o.cause.label(),
        )?;
    }
    Ok(())
}
