//! Sectioned key-value configuration text.
//!
//! The on-disk scenario format is flat and hand-editable: `[section]`
//! headers, `key = value` pairs, `#` comments. Unknown sections or keys
//! are errors, every diagnostic carries a line number, and parsing
//! collects *all* problems instead of stopping at the first. The emitter
//! produces a canonical snapshot that parses back to an identical
//! configuration, which is what makes run manifests replayable.

use std::fmt;

use crate::bb84::Basis;
use crate::fiber::InitialAlignment;
use crate::scenario::{Phase, PhaseOverrides, ScenarioConfig, SimMode};
use crate::stokes::StokesVector;
use crate::waveplate::PLATE_COUNT;

#[derive(Debug, Clone)]
pub struct Diagnostic {
    /// 1-based line number; `None` for post-parse validation findings.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn diag(line: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line: Some(line),
        message: message.into(),
    }
}

/// Parse configuration text into a scenario, starting from defaults.
/// Structural errors (unknown keys, bad numbers, out-of-order phases) are
/// collected; semantic validation is a separate step, see
/// [`parse_and_validate`].
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    let mut cfg = ScenarioConfig::default();
    let mut errors = Vec::new();
    let mut section = String::new();
    let mut phase_index = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                errors.push(diag(lineno, "unterminated section header"));
                continue;
            };
            section = name.trim().to_string();
            if let Some(idx) = section.strip_prefix("phase.") {
                match idx.parse::<usize>() {
                    Ok(n) if n == phase_index + 1 => {
                        phase_index = n;
                        cfg.phases.push(Phase {
                            label: format!("{n}"),
                            duration_s: 0.0,
                            overrides: PhaseOverrides::default(),
                        });
                    }
                    Ok(n) => errors.push(diag(
                        lineno,
                        format!("phase sections must be contiguous from 1; got phase.{n}"),
                    )),
                    Err(_) => errors.push(diag(lineno, "bad phase index")),
                }
            } else if !KNOWN_SECTIONS.contains(&section.as_str()) {
                errors.push(diag(lineno, format!("unknown section [{section}]")));
            }
            continue;
        }
        let Some(eq) = line.find('=') else {
            errors.push(diag(lineno, "expected 'key = value'"));
            continue;
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if section.is_empty() {
            errors.push(diag(lineno, "key outside any [section]"));
            continue;
        }
        if let Err(msg) = apply_pair(&mut cfg, &section, key, value) {
            errors.push(diag(lineno, msg));
        }
    }

    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

/// Parse and then run scenario validation, merging all diagnostics.
pub fn parse_and_validate(text: &str) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    match parse_config(text) {
        Err(e) => Err(e),
        Ok(cfg) => {
            let problems = cfg.validate_all();
            if problems.is_empty() {
                Ok(cfg)
            } else {
                Err(problems
                    .into_iter()
                    .map(|message| Diagnostic {
                        line: None,
                        message,
                    })
                    .collect())
            }
        }
    }
}

const KNOWN_SECTIONS: &[&str] = &[
    "scenario",
    "source",
    "detector",
    "budget",
    "fiber",
    "scrambler",
    "references",
    "controller",
];

fn parse_f64(value: &str) -> Result<f64, String> {
    value
        .parse()
        .map_err(|_| format!("expected a number, got '{value}'"))
}

fn parse_u64(value: &str) -> Result<u64, String> {
    value
        .parse()
        .map_err(|_| format!("expected an integer, got '{value}'"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{value}'")),
    }
}

fn parse_vec3(value: &str) -> Result<StokesVector, String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected 's1,s2,s3', got '{value}'"));
    }
    Ok(StokesVector::new(
        parse_f64(parts[0])?,
        parse_f64(parts[1])?,
        parse_f64(parts[2])?,
    ))
}

fn parse_fixed_state(value: &str) -> Result<Option<(bool, Basis)>, String> {
    match value {
        "none" => Ok(None),
        "H" => Ok(Some((false, Basis::Rectilinear))),
        "V" => Ok(Some((true, Basis::Rectilinear))),
        "D" => Ok(Some((false, Basis::Diagonal))),
        "A" => Ok(Some((true, Basis::Diagonal))),
        _ => Err(format!("expected none|H|V|D|A, got '{value}'")),
    }
}

fn fixed_state_label(fs: &Option<(bool, Basis)>) -> &'static str {
    match fs {
        None => "none",
        Some((false, Basis::Rectilinear)) => "H",
        Some((true, Basis::Rectilinear)) => "V",
        Some((false, Basis::Diagonal)) => "D",
        Some((true, Basis::Diagonal)) => "A",
    }
}

fn apply_pair(
    cfg: &mut ScenarioConfig,
    section: &str,
    key: &str,
    value: &str,
) -> Result<(), String> {
    if section.starts_with("phase.") {
        let Some(phase) = cfg.phases.last_mut() else {
            return Err("key inside an invalid phase section".into());
        };
        return match key {
            "label" => {
                phase.label = value.to_string();
                Ok(())
            }
            "duration_s" => {
                phase.duration_s = parse_f64(value)?;
                Ok(())
            }
            "control_enabled" => {
                phase.overrides.control_enabled = Some(parse_bool(value)?);
                Ok(())
            }
            "scrambler_enabled" => {
                phase.overrides.scrambler_enabled = Some(parse_bool(value)?);
                Ok(())
            }
            "scrambler_frequency_hz" => {
                phase.overrides.scrambler_frequency_hz = Some(parse_f64(value)?);
                Ok(())
            }
            "drift_rate_rad_per_s" => {
                phase.overrides.drift_rate_rad_per_s = Some(parse_f64(value)?);
                Ok(())
            }
            _ => Err(format!("unknown key '{key}' in [{section}]")),
        };
    }
    match (section, key) {
        ("scenario", "duration_s") => cfg.duration_s = parse_f64(value)?,
        ("scenario", "warmup_s") => cfg.warmup_s = parse_f64(value)?,
        ("scenario", "control_period_s") => cfg.control_period_s = parse_f64(value)?,
        ("scenario", "pulse_rep_rate_hz") => {
            cfg.pulse_rep_rate_hz = parse_f64(value)?;
            cfg.source.rep_rate_hz = cfg.pulse_rep_rate_hz;
        }
        ("scenario", "report_interval_pulses") => {
            cfg.report_interval_pulses = parse_u64(value)?
        }
        ("scenario", "mode") => {
            cfg.mode = match value {
                "montecarlo" => SimMode::MonteCarlo,
                "analytic" => SimMode::Analytic,
                _ => return Err(format!("expected montecarlo|analytic, got '{value}'")),
            }
        }
        ("scenario", "seed") => cfg.seed = parse_u64(value)?,
        ("scenario", "dark_slot_ns") => cfg.dark_slot_ns = parse_f64(value)?,
        ("source", "mu") => cfg.source.mu = parse_f64(value)?,
        ("source", "modulator_error_rms") => {
            cfg.source.modulator_error_rms = parse_f64(value)?
        }
        ("source", "fixed_state") => cfg.fixed_state = parse_fixed_state(value)?,
        ("detector", "efficiency") => cfg.detector.efficiency = parse_f64(value)?,
        ("detector", "dark_count_prob") => cfg.detector.dark_count_prob = parse_f64(value)?,
        ("detector", "gate_ns") => cfg.detector.gate_ns = parse_f64(value)?,
        ("detector", "pbs_extinction_db") => {
            cfg.detector.pbs_extinction_db = parse_f64(value)?
        }
        ("detector", "side_noise_prob") => cfg.detector.side_noise_prob = parse_f64(value)?,
        ("budget", "fiber_loss_db") => {
            cfg.budget.fiber_loss_db = parse_f64(value)?;
            cfg.fiber.loss_db = cfg.budget.fiber_loss_db;
        }
        ("budget", "mux_insertion_db") => cfg.budget.mux_insertion_db = parse_f64(value)?,
        ("budget", "demux_insertion_db") => cfg.budget.demux_insertion_db = parse_f64(value)?,
        ("budget", "bpf_insertion_db") => cfg.budget.bpf_insertion_db = parse_f64(value)?,
        ("budget", "adjacent_extinction_db") => {
            cfg.budget.adjacent_extinction_db = parse_f64(value)?
        }
        ("budget", "nonadjacent_extinction_db") => {
            cfg.budget.nonadjacent_extinction_db = parse_f64(value)?
        }
        ("fiber", "mean_dgd_s") => cfg.fiber.mean_dgd_s = parse_f64(value)?,
        ("fiber", "drift_rate_rad_per_s") => {
            cfg.fiber.drift_rate_rad_per_s = parse_f64(value)?
        }
        ("fiber", "initial") => {
            cfg.fiber.initial = match value {
                "aligned" => InitialAlignment::Aligned,
                "random" => InitialAlignment::Random,
                _ => return Err(format!("expected aligned|random, got '{value}'")),
            }
        }
        ("scrambler", "enabled") => cfg.scrambler.enabled = parse_bool(value)?,
        ("scrambler", "frequency_hz") => cfg.scrambler.frequency_hz = parse_f64(value)?,
        ("scrambler", "phase_offsets_rad") => {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err("expected three comma-separated phases".into());
            }
            for (slot, p) in cfg.scrambler.phase_offsets_rad.iter_mut().zip(&parts) {
                *slot = parse_f64(p)?;
            }
        }
        ("references", "s1") => {
            let v = parse_vec3(value)?;
            cfg.references.plus.launch_sop = v;
            cfg.references.plus.analyzer_sop = v;
        }
        ("references", "s3") => {
            let v = parse_vec3(value)?;
            cfg.references.minus.launch_sop = v;
            cfg.references.minus.analyzer_sop = v;
        }
        ("references", "wavelength_offset_rad_per_s") => {
            let w = parse_f64(value)?;
            if w < 0.0 {
                return Err("wavelength offset magnitude must be >= 0".into());
            }
            cfg.references.plus.wavelength_offset_rad_per_s = w;
            cfg.references.minus.wavelength_offset_rad_per_s = -w;
        }
        ("references", "power_dbm") => {
            let p = parse_f64(value)?;
            cfg.references.plus.power_dbm = p;
            cfg.references.minus.power_dbm = p;
        }
        ("references", "photodiode_noise_rms") => {
            let n = parse_f64(value)?;
            if n < 0.0 {
                return Err("photodiode noise must be >= 0".into());
            }
            cfg.references.plus.photodiode_noise_rms = n;
            cfg.references.minus.photodiode_noise_rms = n;
        }
        ("references", "collinearity_threshold") => {
            cfg.references.collinearity_threshold = parse_f64(value)?
        }
        ("controller", "enabled") => cfg.control_enabled = parse_bool(value)?,
        ("controller", "dither_rad") => cfg.controller.dither_rad = parse_f64(value)?,
        ("controller", "retardance_leak") => {
            cfg.controller.retardance_leak = parse_f64(value)?
        }
        ("controller", "step_gain") => cfg.controller.step_gain = parse_f64(value)?,
        ("controller", "phi_max_rad") => cfg.controller.phi_max_rad = parse_f64(value)?,
        ("controller", "initial_retardances") => {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != PLATE_COUNT {
                return Err(format!("expected {PLATE_COUNT} comma-separated retardances"));
            }
            let mut r = [0.0; PLATE_COUNT];
            for (slot, p) in r.iter_mut().zip(&parts) {
                *slot = parse_f64(p)?;
            }
            cfg.controller.initial_retardances = r;
        }
        _ => return Err(format!("unknown key '{key}' in [{section}]")),
    }
    Ok(())
}

/// Canonical text snapshot of a scenario; `parse_config` of the output
/// reproduces the input configuration exactly.
pub fn emit_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let kv = |s: &mut String, k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    out.push_str("[scenario]\n");
    kv(&mut out, "duration_s", format!("{}", cfg.duration_s));
    kv(&mut out, "warmup_s", format!("{}", cfg.warmup_s));
    kv(
        &mut out,
        "control_period_s",
        format!("{}", cfg.control_period_s),
    );
    kv(
        &mut out,
        "pulse_rep_rate_hz",
        format!("{}", cfg.pulse_rep_rate_hz),
    );
    kv(
        &mut out,
        "report_interval_pulses",
        format!("{}", cfg.report_interval_pulses),
    );
    kv(&mut out, "mode", cfg.mode.label().to_string());
    kv(&mut out, "seed", format!("{}", cfg.seed));
    kv(&mut out, "dark_slot_ns", format!("{}", cfg.dark_slot_ns));

    out.push_str("\n[source]\n");
    kv(&mut out, "mu", format!("{}", cfg.source.mu));
    kv(
        &mut out,
        "modulator_error_rms",
        format!("{}", cfg.source.modulator_error_rms),
    );
    kv(
        &mut out,
        "fixed_state",
        fixed_state_label(&cfg.fixed_state).to_string(),
    );

    out.push_str("\n[detector]\n");
    kv(&mut out, "efficiency", format!("{}", cfg.detector.efficiency));
    kv(
        &mut out,
        "dark_count_prob",
        format!("{}", cfg.detector.dark_count_prob),
    );
    kv(&mut out, "gate_ns", format!("{}", cfg.detector.gate_ns));
    kv(
        &mut out,
        "pbs_extinction_db",
        format!("{}", cfg.detector.pbs_extinction_db),
    );
    kv(
        &mut out,
        "side_noise_prob",
        format!("{}", cfg.detector.side_noise_prob),
    );

    out.push_str("\n[budget]\n");
    kv(
        &mut out,
        "fiber_loss_db",
        format!("{}", cfg.budget.fiber_loss_db),
    );
    kv(
        &mut out,
        "mux_insertion_db",
        format!("{}", cfg.budget.mux_insertion_db),
    );
    kv(
        &mut out,
        "demux_insertion_db",
        format!("{}", cfg.budget.demux_insertion_db),
    );
    kv(
        &mut out,
        "bpf_insertion_db",
        format!("{}", cfg.budget.bpf_insertion_db),
    );
    kv(
        &mut out,
        "adjacent_extinction_db",
        format!("{}", cfg.budget.adjacent_extinction_db),
    );
    kv(
        &mut out,
        "nonadjacent_extinction_db",
        format!("{}", cfg.budget.nonadjacent_extinction_db),
    );

    out.push_str("\n[fiber]\n");
    kv(&mut out, "mean_dgd_s", format!("{}", cfg.fiber.mean_dgd_s));
    kv(
        &mut out,
        "drift_rate_rad_per_s",
        format!("{}", cfg.fiber.drift_rate_rad_per_s),
    );
    kv(
        &mut out,
        "initial",
        match cfg.fiber.initial {
            InitialAlignment::Aligned => "aligned".to_string(),
            InitialAlignment::Random => "random".to_string(),
        },
    );

    out.push_str("\n[scrambler]\n");
    kv(&mut out, "enabled", format!("{}", cfg.scrambler.enabled));
    kv(
        &mut out,
        "frequency_hz",
        format!("{}", cfg.scrambler.frequency_hz),
    );
    let ph = cfg.scrambler.phase_offsets_rad;
    kv(
        &mut out,
        "phase_offsets_rad",
        format!("{},{},{}", ph[0], ph[1], ph[2]),
    );

    out.push_str("\n[references]\n");
    let s1 = cfg.references.plus.launch_sop;
    let s3 = cfg.references.minus.launch_sop;
    kv(&mut out, "s1", format!("{},{},{}", s1.s1, s1.s2, s1.s3));
    kv(&mut out, "s3", format!("{},{},{}", s3.s1, s3.s2, s3.s3));
    kv(
        &mut out,
        "wavelength_offset_rad_per_s",
        format!("{}", cfg.references.plus.wavelength_offset_rad_per_s),
    );
    kv(
        &mut out,
        "power_dbm",
        format!("{}", cfg.references.plus.power_dbm),
    );
    kv(
        &mut out,
        "photodiode_noise_rms",
        format!("{}", cfg.references.plus.photodiode_noise_rms),
    );
    kv(
        &mut out,
        "collinearity_threshold",
        format!("{}", cfg.references.collinearity_threshold),
    );

    out.push_str("\n[controller]\n");
    kv(&mut out, "enabled", format!("{}", cfg.control_enabled));
    kv(
        &mut out,
        "dither_rad",
        format!("{}", cfg.controller.dither_rad),
    );
    kv(
        &mut out,
        "retardance_leak",
        format!("{}", cfg.controller.retardance_leak),
    );
    kv(&mut out, "step_gain", format!("{}", cfg.controller.step_gain));
    kv(
        &mut out,
        "phi_max_rad",
        format!("{}", cfg.controller.phi_max_rad),
    );
    let r = cfg.controller.initial_retardances;
    kv(
        &mut out,
        "initial_retardances",
        r.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(","),
    );

    for (i, p) in cfg.phases.iter().enumerate() {
        out.push_str(&format!("\n[phase.{}]\n", i + 1));
        kv(&mut out, "label", p.label.clone());
        kv(&mut out, "duration_s", format!("{}", p.duration_s));
        if let Some(v) = p.overrides.control_enabled {
            kv(&mut out, "control_enabled", format!("{v}"));
        }
        if let Some(v) = p.overrides.scrambler_enabled {
            kv(&mut out, "scrambler_enabled", format!("{v}"));
        }
        if let Some(v) = p.overrides.scrambler_frequency_hz {
            kv(&mut out, "scrambler_frequency_hz", format!("{v}"));
        }
        if let Some(v) = p.overrides.drift_rate_rad_per_s {
            kv(&mut out, "drift_rate_rad_per_s", format!("{v}"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{
        scenario_keyexchange_phases, scenario_scramble_sweep, scenario_static,
    };

    #[test]
    fn emit_parse_round_trip_static() {
        let cfg = scenario_static();
        let text = emit_config(&cfg);
        let back = parse_and_validate(&text).unwrap();
        assert_eq!(emit_config(&back), text);
    }

    #[test]
    fn emit_parse_round_trip_keyexchange() {
        let cfg = scenario_keyexchange_phases();
        let text = emit_config(&cfg);
        let back = parse_and_validate(&text).unwrap();
        assert_eq!(emit_config(&back), text);
        assert_eq!(back.phases.len(), 4);
        assert_eq!(back.phases[2].overrides.control_enabled, Some(false));
    }

    #[test]
    fn emit_parse_round_trip_sweep_member() {
        let cfg = &scenario_scramble_sweep(&[4.0])[0];
        let text = emit_config(cfg);
        let back = parse_and_validate(&text).unwrap();
        assert_eq!(emit_config(&back), text);
        assert_eq!(back.fixed_state, cfg.fixed_state);
    }

    #[test]
    fn unknown_keys_are_reported_with_lines() {
        let text = "[scenario]\nduration_s = 1\nbogus = 3\n[nonsense]\nx = 1\n";
        let errs = parse_config(text).unwrap_err();
        assert_eq!(errs.len(), 3); // bogus key, unknown section, key within it
        assert!(errs[0].to_string().contains("line 3"));
    }

    #[test]
    fn all_diagnostics_come_back_at_once() {
        let text = "\
[scenario]
duration_s = -5
mode = sideways
[source]
mu = oops
";
        let errs = parse_config(text).unwrap_err();
        assert_eq!(errs.len(), 2); // mode, mu (duration is a validation matter)
        let text_ok_parse = "[scenario]\nduration_s = -5\n[source]\nmu = 0\n";
        let errs = parse_and_validate(text_ok_parse).unwrap_err();
        assert!(errs.len() >= 2, "{errs:?}");
    }

    #[test]
    fn collinear_references_diagnosed() {
        let text = "[references]\ns1 = 1,0,0\ns3 = -1,0,0\n";
        let errs = parse_and_validate(text).unwrap_err();
        assert!(
            errs.iter().any(|d| d.message.contains("Poincar")),
            "{errs:?}"
        );
    }

    #[test]
    fn duty_cycle_violation_diagnosed() {
        let text = "[scenario]\ndark_slot_ns = 300\n";
        let errs = parse_and_validate(text).unwrap_err();
        assert!(
            errs.iter().any(|d| d.message.contains("dark slot")),
            "{errs:?}"
        );
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# top comment\n\n[scenario]\nseed = 9 # trailing\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn phase_sections_must_be_contiguous() {
        let text = "[phase.2]\nduration_s = 1\n";
        assert!(parse_config(text).is_err());
    }
}
