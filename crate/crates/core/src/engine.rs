//! Deterministic time-stepped scenario driver.
//!
//! Three clocks interleave. The channel and control loop advance in
//! control periods: every period the fiber takes one drift step, the
//! scrambler is sampled, and the reference photodiodes are read once.
//! When the controller is active that reading serves as one probe
//! evaluation of the feedback iteration (two probes per iteration, so
//! dithering consumes real loop bandwidth). Quantum pulses tick at the
//! source repetition rate inside each period, either simulated one by one
//! (Monte Carlo) or integrated as expected rates from the residual
//! transform (analytic). A reporting point is emitted every
//! `report_interval_pulses` sent pulses.
//!
//! Runs are bit-reproducible: all randomness derives from the scenario
//! seed through fixed substreams, and the two modes share the fiber,
//! controller, and photodiode streams, so an analytic run follows the
//! exact control trajectory of its Monte Carlo twin.

use std::io::Write;

use crate::bb84::{detect_pulse, transmit_pulse_as, Basis};
use crate::compensator::ControllerState;
use crate::error::{Error, Result};
use crate::fiber::{channel_transmission, FiberChannelState, ScramblerState};
use crate::rng::SimRng;
use crate::scenario::{streams, Phase, ScenarioConfig, SimMode};
use crate::stokes::StokesVector;
use crate::unitary::PolUnitary;
use crate::waveplate::{unitary_for, PLATE_COUNT};

/// One reporting interval, matching the output file schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesPoint {
    pub t_s: f64,
    pub qber_total: f64,
    pub qber_opt: f64,
    pub qber_det: f64,
    pub qber_side: f64,
    /// Mean summed reference intensity over the interval, in [0, 2].
    pub objective: f64,
    /// Cumulative controller hard resets.
    pub resets: u64,
}

/// Aggregate counts over the whole run (post-warmup). Monte Carlo counts
/// are integers stored exactly; analytic mode accumulates expectations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunTotals {
    pub sent: u64,
    pub sifted: f64,
    pub err_opt: f64,
    pub err_det: f64,
    pub err_side: f64,
    pub resets: u64,
}

impl RunTotals {
    pub fn qber_total(&self) -> f64 {
        if self.sifted > 0.0 {
            (self.err_opt + self.err_det + self.err_side) / self.sifted
        } else {
            0.0
        }
    }

    pub fn qber_opt(&self) -> f64 {
        if self.sifted > 0.0 {
            self.err_opt / self.sifted
        } else {
            0.0
        }
    }

    pub fn qber_det(&self) -> f64 {
        if self.sifted > 0.0 {
            self.err_det / self.sifted
        } else {
            0.0
        }
    }

    pub fn qber_side(&self) -> f64 {
        if self.sifted > 0.0 {
            self.err_side / self.sifted
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub points: Vec<TimeSeriesPoint>,
    pub totals: RunTotals,
}

#[derive(Debug, Clone, Copy, Default)]
struct RateBucket {
    sent: u64,
    sifted: f64,
    err_opt: f64,
    err_det: f64,
    err_side: f64,
    objective_sum: f64,
    periods: u64,
}

struct PhasePlan {
    /// Start pulse index of each phase, plus settings after its overrides.
    starts: Vec<(u64, bool, bool, f64, f64)>,
    next: usize,
}

impl PhasePlan {
    fn build(cfg: &ScenarioConfig) -> Self {
        let mut starts = Vec::new();
        let mut control = cfg.control_enabled;
        let mut scrambler = cfg.scrambler.enabled;
        let mut freq = cfg.scrambler.frequency_hz;
        let mut drift = cfg.fiber.drift_rate_rad_per_s;
        let mut t = 0.0;
        let phases: &[Phase] = &cfg.phases;
        if phases.is_empty() {
            starts.push((0, control, scrambler, freq, drift));
        } else {
            for p in phases {
                control = p.overrides.control_enabled.unwrap_or(control);
                scrambler = p.overrides.scrambler_enabled.unwrap_or(scrambler);
                freq = p.overrides.scrambler_frequency_hz.unwrap_or(freq);
                drift = p.overrides.drift_rate_rad_per_s.unwrap_or(drift);
                let start_pulse = (t * cfg.pulse_rep_rate_hz).round() as u64;
                starts.push((start_pulse, control, scrambler, freq, drift));
                t += p.duration_s;
            }
        }
        Self { starts, next: 0 }
    }
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    fiber: FiberChannelState,
    scrambler: ScramblerState,
    ref_rng: SimRng,
    pulse_rng: SimRng,
    plan: PhasePlan,
    control_enabled: bool,

    transmission: f64,
    leakage: f64,
    /// P(at least one signal photon detected) per pulse.
    p_signal: f64,
    /// Expected preparation infidelity from the modulator error.
    prep_deficit: f64,
    sift_fraction: f64,
    /// Stokes vectors of the states entering the analytic average.
    analytic_states: Vec<StokesVector>,

    period_index: u64,
    pulses_done: u64,
    total_pulses: u64,
    next_boundary: u64,
    in_warmup: bool,

    bucket: RateBucket,
    totals: RunTotals,
    points: Vec<TimeSeriesPoint>,
    latest_resets: u64,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let transmission = channel_transmission(&cfg.budget)?;
        let mut scrambler = ScramblerState::new(cfg.scrambler.frequency_hz);
        scrambler.phases = cfg.scrambler.phase_offsets_rad;
        scrambler.enabled = cfg.scrambler.enabled;
        let sigma = cfg.source.modulator_error_rms;
        let prep_deficit = (1.0 - (-0.5 * sigma * sigma).exp()) / 3.0;
        let analytic_states: Vec<StokesVector> = match cfg.fixed_state {
            Some((bit, basis)) => vec![cfg.source.state_for(bit, basis).stokes()],
            None => cfg.source.alphabet.iter().map(|j| j.stokes()).collect(),
        };
        let total_pulses = cfg.total_pulses();
        let warmup_pulses = (cfg.warmup_s * cfg.pulse_rep_rate_hz).round() as u64;
        let in_warmup = warmup_pulses > 0;
        let next_boundary = if in_warmup {
            warmup_pulses
        } else {
            cfg.report_interval_pulses
        };
        Ok(Self {
            cfg,
            fiber: FiberChannelState::with_rng(
                &cfg.fiber,
                cfg.rng_stream(streams::FIBER),
            ),
            scrambler,
            ref_rng: cfg.rng_stream(streams::REFERENCE_NOISE),
            pulse_rng: cfg.rng_stream(streams::PULSES),
            plan: PhasePlan::build(cfg),
            control_enabled: cfg.control_enabled,
            transmission,
            leakage: cfg.detector.leakage(),
            p_signal: 1.0
                - (-cfg.source.mu * transmission * cfg.detector.efficiency).exp(),
            prep_deficit,
            sift_fraction: if cfg.fixed_state.is_some() { 1.0 } else { 0.5 },
            analytic_states,
            period_index: 0,
            pulses_done: 0,
            total_pulses,
            next_boundary,
            in_warmup,
            bucket: RateBucket::default(),
            totals: RunTotals::default(),
            points: Vec::new(),
            latest_resets: 0,
        })
    }

    fn apply_phase_settings(&mut self) {
        while self.plan.next < self.plan.starts.len()
            && self.pulses_done >= self.plan.starts[self.plan.next].0
        {
            let (_, control, scram, freq, drift) = self.plan.starts[self.plan.next];
            self.control_enabled = control;
            self.scrambler.enabled = scram;
            self.scrambler.ramp_frequency_hz = freq;
            self.fiber.set_drift_rate(drift);
            self.plan.next += 1;
        }
    }

    fn flush(&mut self) {
        let emit = !self.in_warmup;
        if emit && self.bucket.sent > 0 {
            let b = &self.bucket;
            let sifted = b.sifted;
            let rate = |err: f64| if sifted > 0.0 { err / sifted } else { 0.0 };
            let point = TimeSeriesPoint {
                t_s: self.pulses_done as f64 / self.cfg.pulse_rep_rate_hz,
                qber_total: rate(b.err_opt + b.err_det + b.err_side),
                qber_opt: rate(b.err_opt),
                qber_det: rate(b.err_det),
                qber_side: rate(b.err_side),
                objective: if b.periods > 0 {
                    b.objective_sum / b.periods as f64
                } else {
                    0.0
                },
                resets: self.latest_resets,
            };
            self.points.push(point);
            self.totals.sent += b.sent;
            self.totals.sifted += b.sifted;
            self.totals.err_opt += b.err_opt;
            self.totals.err_det += b.err_det;
            self.totals.err_side += b.err_side;
        }
        self.bucket = RateBucket::default();
        self.in_warmup = false;
        self.next_boundary = self.pulses_done + self.cfg.report_interval_pulses;
    }

    /// Advance one control period with the stack at `retardances` and
    /// return the two reference intensities measured during it.
    fn advance_period(&mut self, retardances: &[f64; PLATE_COUNT]) -> (f64, f64) {
        self.apply_phase_settings();
        let t0 = self.period_index as f64 * self.cfg.control_period_s;
        let stack_u = unitary_for(retardances);
        let scr_u = self.scrambler.unitary_at(t0);

        let refs = &self.cfg.references;
        let u_plus = stack_u
            .mul(
                &self
                    .fiber
                    .unitary_at_wavelength(refs.plus.wavelength_offset_rad_per_s)
                    .unitary,
            )
            .mul(&scr_u);
        let u_minus = stack_u
            .mul(
                &self
                    .fiber
                    .unitary_at_wavelength(refs.minus.wavelength_offset_rad_per_s)
                    .unitary,
            )
            .mul(&scr_u);
        let i1 = refs.plus.measure(&u_plus, &mut self.ref_rng);
        let i3 = refs.minus.measure(&u_minus, &mut self.ref_rng);
        self.bucket.objective_sum += i1 + i3;
        self.bucket.periods += 1;

        let u_q = stack_u.mul(&self.fiber.unitary()).mul(&scr_u);
        let t_end = t0 + self.cfg.control_period_s;
        let rep = self.cfg.pulse_rep_rate_hz;
        let pulses_in_period = {
            let end_idx = (t_end * rep).floor() as u64;
            end_idx.min(self.total_pulses).saturating_sub(self.pulses_done)
        };
        match self.cfg.mode {
            SimMode::MonteCarlo => self.monte_carlo_pulses(pulses_in_period, &u_q),
            SimMode::Analytic => self.analytic_pulses(pulses_in_period, &u_q),
        }

        self.fiber.step(self.cfg.control_period_s);
        self.period_index += 1;
        (i1, i3)
    }

    fn monte_carlo_pulses(&mut self, count: u64, u_q: &PolUnitary) {
        let src = &self.cfg.source;
        let det = &self.cfg.detector;
        for _ in 0..count {
            let (bit, basis, bob_basis) = match self.cfg.fixed_state {
                Some((bit, basis)) => (bit, basis, basis),
                None => {
                    let bit = self.pulse_rng.bool();
                    let basis = if self.pulse_rng.bool() {
                        Basis::Diagonal
                    } else {
                        Basis::Rectilinear
                    };
                    let bob = if self.pulse_rng.bool() {
                        Basis::Diagonal
                    } else {
                        Basis::Rectilinear
                    };
                    (bit, basis, bob)
                }
            };
            let (n, prepared) = transmit_pulse_as(src, bit, basis, &mut self.pulse_rng);
            let mut outcome = if n > 0 {
                let arriving = u_q.apply_jones(&prepared);
                detect_pulse(n, &arriving, bob_basis, det, self.transmission, &mut self.pulse_rng)
            } else {
                detect_pulse(0, &prepared, bob_basis, det, self.transmission, &mut self.pulse_rng)
            };
            outcome.alice_bit = bit;
            outcome.alice_basis = basis;

            self.bucket.sent += 1;
            if outcome.sifted() {
                self.bucket.sifted += 1.0;
                if outcome.error() {
                    match outcome.cause {
                        crate::bb84::Cause::Signal => self.bucket.err_opt += 1.0,
                        crate::bb84::Cause::Dark => self.bucket.err_det += 1.0,
                        crate::bb84::Cause::Side => self.bucket.err_side += 1.0,
                        crate::bb84::Cause::None => {}
                    }
                }
            }
            self.pulses_done += 1;
            if self.pulses_done == self.next_boundary {
                self.flush();
            }
        }
    }

    fn analytic_pulses(&mut self, count: u64, u_q: &PolUnitary) {
        if count == 0 {
            return;
        }
        // Mean fidelity of the encoded states through the residual, folded
        // with the expected preparation error.
        let mut fbar = 0.0;
        for s in &self.analytic_states {
            fbar += 0.5 * (1.0 + u_q.rotate(s).dot(s));
        }
        fbar /= self.analytic_states.len() as f64;
        let fbar_eff = fbar * (1.0 - 2.0 * self.prep_deficit) + self.prep_deficit;
        let err_opt_rate =
            (1.0 - fbar_eff) * (1.0 - self.leakage) + fbar_eff * self.leakage;

        let det = &self.cfg.detector;
        let p_click = self.p_signal + 2.0 * det.dark_count_prob + 2.0 * det.side_noise_prob;

        let mut remaining = count;
        while remaining > 0 {
            let chunk = remaining.min(self.next_boundary - self.pulses_done);
            let m = chunk as f64 * self.sift_fraction;
            self.bucket.sent += chunk;
            self.bucket.sifted += m * p_click;
            self.bucket.err_opt += m * self.p_signal * err_opt_rate;
            self.bucket.err_det += m * det.dark_count_prob;
            self.bucket.err_side += m * det.side_noise_prob;
            self.pulses_done += chunk;
            remaining -= chunk;
            if self.pulses_done == self.next_boundary {
                self.flush();
            }
        }
    }
}

/// Run one scenario to completion. Deterministic: the same configuration
/// (including its seed) always produces identical output.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let mut engine = Engine::new(cfg)?;
    let mut controller = ControllerState::new(
        &cfg.controller,
        cfg.rng_stream(streams::CONTROLLER),
    );
    while engine.pulses_done < engine.total_pulses {
        engine.latest_resets = controller.resets;
        if engine.control_enabled {
            controller.control_step(|r| engine.advance_period(r));
        } else {
            let held = controller.stack.retardances();
            engine.advance_period(&held);
        }
    }
    engine.latest_resets = controller.resets;
    engine.totals.resets = controller.resets;
    Ok(ScenarioResult {
        points: engine.points,
        totals: engine.totals,
    })
}

/// Per-frequency aggregate of a sweep run: mean and spread of the optical
/// error share over the run's reporting points.
#[derive(Debug, Clone, Copy)]
pub struct SweepSummary {
    pub frequency_hz: f64,
    /// Total sweep rate under the 4π rad/s per hertz convention.
    pub rotation_rate_rad_per_s: f64,
    pub points: usize,
    pub mean_qber_opt: f64,
    pub std_qber_opt: f64,
    pub mean_qber_total: f64,
    pub std_qber_total: f64,
}

pub fn summarize_sweep_run(frequency_hz: f64, result: &ScenarioResult) -> SweepSummary {
    let opt: Vec<f64> = result.points.iter().map(|p| p.qber_opt).collect();
    let tot: Vec<f64> = result.points.iter().map(|p| p.qber_total).collect();
    let (mo, so) = mean_std(&opt);
    let (mt, st) = mean_std(&tot);
    SweepSummary {
        frequency_hz,
        rotation_rate_rad_per_s: 4.0 * std::f64::consts::PI * frequency_hz,
        points: result.points.len(),
        mean_qber_opt: mo,
        std_qber_opt: so,
        mean_qber_total: mt,
        std_qber_total: st,
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const TIMESERIES_HEADER: &str = "t_s,qber_total,qber_opt,qber_det,qber_side,objective,resets";

pub fn write_timeseries_csv<W: Write>(points: &[TimeSeriesPoint], mut w: W) -> Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{:.6},{:.9},{:.9},{:.9},{:.9},{:.9},{}",
            p.t_s, p.qber_total, p.qber_opt, p.qber_det, p.qber_side, p.objective, p.resets
        )?;
    }
    Ok(())
}

pub fn parse_timeseries_csv(text: &str) -> Result<Vec<TimeSeriesPoint>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TIMESERIES_HEADER => {}
        other => {
            return Err(Error::TableParse(format!(
                "bad header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::TableParse(format!(
                "row {}: expected 7 columns, got {}",
                i + 2,
                cols.len()
            )));
        }
        let f = |j: usize| -> Result<f64> {
            cols[j]
                .trim()
                .parse()
                .map_err(|_| Error::TableParse(format!("row {}: bad number '{}'", i + 2, cols[j])))
        };
        points.push(TimeSeriesPoint {
            t_s: f(0)?,
            qber_total: f(1)?,
            qber_opt: f(2)?,
            qber_det: f(3)?,
            qber_side: f(4)?,
            objective: f(5)?,
            resets: cols[6].trim().parse().map_err(|_| {
                Error::TableParse(format!("row {}: bad count '{}'", i + 2, cols[6]))
            })?,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{scenario_static, Phase, PhaseOverrides};

    fn small_cfg() -> ScenarioConfig {
        let mut cfg = scenario_static();
        cfg.duration_s = 0.2;
        cfg.report_interval_pulses = 200_000;
        cfg
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = small_cfg();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.totals, b.totals);
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_timeseries_csv(&a.points, &mut csv_a).unwrap();
        write_timeseries_csv(&b.points, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn different_seed_differs() {
        let mut cfg = small_cfg();
        let a = run_scenario(&cfg).unwrap();
        cfg.seed ^= 0xDEAD_BEEF;
        let b = run_scenario(&cfg).unwrap();
        assert_ne!(a.points, b.points);
    }

    #[test]
    fn pulses_per_interval_match_clock() {
        let mut cfg = small_cfg();
        cfg.duration_s = 0.5;
        cfg.report_interval_pulses = 500_000;
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.points.len(), 5);
        assert_eq!(r.totals.sent, 2_500_000);
        // Interval timestamps advance by interval/rep.
        for w in r.points.windows(2) {
            let dt = w[1].t_s - w[0].t_s;
            assert!((dt - 0.1).abs() < 1e-9, "dt {dt}");
            assert!(w[1].t_s > w[0].t_s);
        }
    }

    #[test]
    fn identity_channel_control_off_gives_leakage_floor() {
        // Ideal detectors, perfect preparation, aligned fiber: every point
        // of an analytic run sits exactly at the PBS leakage rate.
        let mut cfg = small_cfg();
        cfg.mode = SimMode::Analytic;
        cfg.source.modulator_error_rms = 0.0;
        cfg.detector.dark_count_prob = 0.0;
        cfg.detector.side_noise_prob = 0.0;
        let leak = cfg.detector.leakage();
        let r = run_scenario(&cfg).unwrap();
        assert!(!r.points.is_empty());
        for p in &r.points {
            assert!((p.qber_total - leak).abs() < 1e-12, "point {p:?}");
            assert!((leak - 0.00627).abs() < 1e-5);
        }
    }

    #[test]
    fn warmup_is_excluded_from_output() {
        let mut cfg = small_cfg();
        cfg.mode = SimMode::Analytic;
        cfg.warmup_s = 0.1;
        cfg.duration_s = 0.3;
        cfg.report_interval_pulses = 500_000;
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.points.len(), 2);
        assert_eq!(r.totals.sent, 1_000_000);
        assert!(r.points[0].t_s > 0.1);
    }

    #[test]
    fn phase_boundaries_do_not_reset_channel_state() {
        // A run split into two identical phases must match the unsplit run
        // exactly: phase switches touch toggles, never the channel.
        let mut plain = small_cfg();
        plain.mode = SimMode::Analytic;
        plain.fiber.drift_rate_rad_per_s = 2.0;
        plain.fiber.initial = crate::fiber::InitialAlignment::Random;
        let mut phased = plain.clone();
        phased.phases = vec![
            Phase {
                label: "x".into(),
                duration_s: 0.1,
                overrides: PhaseOverrides::default(),
            },
            Phase {
                label: "y".into(),
                duration_s: 0.1,
                overrides: PhaseOverrides::default(),
            },
        ];
        let a = run_scenario(&plain).unwrap();
        let b = run_scenario(&phased).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn analytic_objective_tracks_lock() {
        // With the controller on and a static channel the mean objective
        // must approach 2.
        let mut cfg = small_cfg();
        cfg.mode = SimMode::Analytic;
        cfg.control_enabled = true;
        cfg.fiber.initial = crate::fiber::InitialAlignment::Random;
        cfg.warmup_s = 0.2;
        cfg.duration_s = 0.4;
        let r = run_scenario(&cfg).unwrap();
        let last = r.points.last().unwrap();
        assert!(last.objective > 1.9, "objective {}", last.objective);
    }

    #[test]
    fn full_chain_budget_with_typical_dark_counts() {
        // Same quiet-link chain as the calibrated preset but with the
        // library-default 1e-5 dark counts per gate and the side noise
        // re-tuned to keep its share at 0.8%: the total stays within
        // 1.6% ± 0.3% (the detector share simply grows).
        let mut cfg = scenario_static();
        cfg.detector.dark_count_prob = 1e-5;
        cfg.detector.side_noise_prob = 2.88e-5;
        cfg.seed = 13;
        let r = run_scenario(&cfg).unwrap();
        let total = r.totals.qber_total();
        assert!((total - 0.016).abs() <= 0.003, "total {total}");
        assert!((r.totals.qber_side() - 0.008).abs() <= 0.002);
    }

    #[test]
    fn scrambled_without_control_scatters_around_half() {
        let mut cfg = small_cfg();
        cfg.mode = SimMode::Analytic;
        cfg.duration_s = 4.0;
        cfg.report_interval_pulses = 1_000_000;
        cfg.control_enabled = false;
        cfg.scrambler.enabled = true;
        cfg.scrambler.frequency_hz = 1.0;
        cfg.fiber.drift_rate_rad_per_s = 10.0;
        cfg.fiber.initial = crate::fiber::InitialAlignment::Random;
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.points.len(), 20);
        let mean = r.points.iter().map(|p| p.qber_total).sum::<f64>() / 20.0;
        assert!((mean - 0.5).abs() < 0.1, "mean {mean}");
        // Individual points genuinely scatter as the channel wanders.
        let spread = r
            .points
            .iter()
            .map(|p| (p.qber_total - mean).abs())
            .fold(0.0f64, f64::max);
        assert!(spread > 0.02, "spread {spread}");
    }

    #[test]
    fn csv_round_trip() {
        let mut cfg = small_cfg();
        cfg.mode = SimMode::Analytic;
        let r = run_scenario(&cfg).unwrap();
        let mut buf = Vec::new();
        write_timeseries_csv(&r.points, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed = parse_timeseries_csv(&text).unwrap();
        assert_eq!(parsed.len(), r.points.len());
        for (a, b) in parsed.iter().zip(&r.points) {
            assert!((a.t_s - b.t_s).abs() < 1e-6);
            assert!((a.qber_total - b.qber_total).abs() < 1e-9);
            assert!((a.objective - b.objective).abs() < 1e-9);
            assert_eq!(a.resets, b.resets);
        }
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(parse_timeseries_csv("nonsense\n1,2\n").is_err());
        let ok_header = format!("{TIMESERIES_HEADER}\n1,2,3\n");
        assert!(parse_timeseries_csv(&ok_header).is_err());
    }

    #[test]
    fn invalid_config_fails_before_running() {
        let mut cfg = small_cfg();
        cfg.references.minus.launch_sop = cfg.references.plus.launch_sop;
        cfg.references.minus.analyzer_sop = cfg.references.plus.launch_sop;
        assert!(run_scenario(&cfg).is_err());
    }
}
