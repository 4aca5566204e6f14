//! `polstab`: run, sweep, and validate polarization-stabilization
//! scenarios from the command line.
//!
//! Every run writes a time-series CSV, a canonical configuration
//! snapshot, and a manifest. Re-running the snapshot (same seed)
//! reproduces the CSV byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use polstab_core::config::{emit_config, parse_and_validate};
use polstab_core::engine::{
    run_scenario, summarize_sweep_run, write_timeseries_csv, ScenarioResult, SweepSummary,
};
use polstab_core::rng::SimRng;
use polstab_core::scenario::{
    default_sweep_frequencies, scenario_keyexchange_phases, scenario_scramble_sweep,
    scenario_static, streams, ScenarioConfig, SimMode,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "polstab",
    version,
    about = "Simulator for continuous polarization-drift compensation on a fiber quantum channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Montecarlo,
    Analytic,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: a builtin preset (static, keyexchange), a config
    /// file, or a manifest from an earlier run.
    Run {
        /// Preset name, config path, or manifest path.
        scenario: String,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the simulation mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Worker threads (used by sweeps; accepted here for symmetry).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a multi-scenario preset: scramble-sweep or keyexchange.
    Sweep {
        /// Preset name: scramble-sweep | keyexchange.
        preset: String,
        #[arg(long)]
        out: PathBuf,
        /// Override the master seed the per-scenario seeds derive from.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of processors.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Validate a config file, reporting every problem at once.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            mode,
            workers: _,
        } => cmd_run(&scenario, &out, seed, mode),
        Command::Sweep {
            preset,
            out,
            seed,
            workers,
        } => cmd_sweep(&preset, &out, seed, workers),
        Command::Validate { config } => cmd_validate(&config),
    }
}

fn cmd_run(scenario: &str, out: &Path, seed: Option<u64>, mode: Option<ModeArg>) -> ExitCode {
    let mut cfg = match load_scenario(scenario) {
        Ok(cfg) => cfg,
        Err(diags) => {
            for d in diags {
                eprintln!("error: {d}");
            }
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = mode {
        cfg.mode = match m {
            ModeArg::Montecarlo => SimMode::MonteCarlo,
            ModeArg::Analytic => SimMode::Analytic,
        };
    }
    let problems = cfg.validate_all();
    if !problems.is_empty() {
        for p in problems {
            eprintln!("error: {p}");
        }
        return ExitCode::from(EXIT_VALIDATION);
    }

    let started = unix_now();
    let result = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    match write_run_outputs(&cfg, &result, out, started) {
        Ok(()) => {
            print_run_summary(&result);
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_sweep(preset: &str, out: &Path, seed: Option<u64>, workers: Option<usize>) -> ExitCode {
    match preset {
        "scramble-sweep" => cmd_sweep_scramble(out, seed, workers),
        "keyexchange" => cmd_sweep_keyexchange(out, seed),
        other => {
            eprintln!("error: unknown sweep preset '{other}' (expected scramble-sweep | keyexchange)");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn cmd_sweep_scramble(out: &Path, seed: Option<u64>, workers: Option<usize>) -> ExitCode {
    let freqs = default_sweep_frequencies();
    let mut cfgs = scenario_scramble_sweep(&freqs);
    if let Some(master) = seed {
        for (i, cfg) in cfgs.iter_mut().enumerate() {
            cfg.seed = SimRng::substream(master, streams::SWEEP_BASE + i as u64).next_u64();
        }
    }
    let workers = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    let started = unix_now();
    let results = match run_parallel(&cfgs, workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };

    let write = || -> anyhow::Result<()> {
        fs::create_dir_all(out)?;
        let mut summary = String::from(
            "frequency_hz,rotation_rate_rad_per_s,points,mean_qber_opt,std_qber_opt,\
             mean_qber_total,std_qber_total,ref_qber_opt,within_ref\n",
        );
        let mut outputs = Vec::new();
        for ((cfg, freq), result) in cfgs.iter().zip(&freqs).zip(&results) {
            let name = format!("freq_{freq}hz.csv");
            let mut csv = Vec::new();
            write_timeseries_csv(&result.points, &mut csv)?;
            write_atomic(&out.join(&name), &csv)?;
            let snap = format!("config_{freq}hz.conf");
            write_atomic(&out.join(&snap), emit_config(cfg).as_bytes())?;
            outputs.push(name);
            outputs.push(snap);
            summary.push_str(&summary_row(&summarize_sweep_run(*freq, result)));
        }
        write_atomic(&out.join("summary.csv"), summary.as_bytes())?;
        outputs.push("summary.csv".into());
        let manifest = sweep_manifest(seed, &freqs, &outputs, started);
        write_atomic(&out.join("manifest.txt"), manifest.as_bytes())?;
        Ok(())
    };
    match write() {
        Ok(()) => {
            for (freq, result) in freqs.iter().zip(&results) {
                let s = summarize_sweep_run(*freq, result);
                println!(
                    "{:6.1} Hz ({:7.1} rad/s): mean optical error {:.4} ± {:.4}",
                    freq, s.rotation_rate_rad_per_s, s.mean_qber_opt, s.std_qber_opt
                );
            }
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_sweep_keyexchange(out: &Path, seed: Option<u64>) -> ExitCode {
    let mut cfg = scenario_keyexchange_phases();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let started = unix_now();
    let result = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let write = || -> anyhow::Result<()> {
        write_run_outputs(&cfg, &result, out, started)?;
        // Per-phase aggregate rows on top of the raw series.
        let mut rows = String::from(
            "phase,start_s,end_s,points,mean_qber_total,mean_qber_opt,mean_objective\n",
        );
        let mut t0 = 0.0;
        for phase in &cfg.phases {
            let t1 = t0 + phase.duration_s;
            let pts: Vec<_> = result
                .points
                .iter()
                .filter(|p| p.t_s > t0 && p.t_s <= t1)
                .collect();
            let n = pts.len().max(1) as f64;
            rows.push_str(&format!(
                "{},{},{},{},{:.9},{:.9},{:.9}\n",
                phase.label,
                t0,
                t1,
                pts.len(),
                pts.iter().map(|p| p.qber_total).sum::<f64>() / n,
                pts.iter().map(|p| p.qber_opt).sum::<f64>() / n,
                pts.iter().map(|p| p.objective).sum::<f64>() / n,
            ));
            t0 = t1;
        }
        write_atomic(&out.join("phases.csv"), rows.as_bytes())?;
        Ok(())
    };
    match write() {
        Ok(()) => {
            print_run_summary(&result);
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_validate(config: &Path) -> ExitCode {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    match parse_and_validate(&text) {
        Ok(_) => {
            println!("{}: ok", config.display());
            ExitCode::SUCCESS
        }
        Err(diags) => {
            for d in diags {
                eprintln!("{}: {d}", config.display());
            }
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

/// Resolve a preset name, config file, or manifest file.
fn load_scenario(arg: &str) -> Result<ScenarioConfig, Vec<String>> {
    match arg {
        "static" => return Ok(scenario_static()),
        "keyexchange" => return Ok(scenario_keyexchange_phases()),
        _ => {}
    }
    let path = Path::new(arg);
    let text = fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
    if text.trim_start().starts_with("[manifest]") {
        let dir = path.parent().unwrap_or(Path::new("."));
        let snapshot = manifest_value(&text, "config_snapshot")
            .ok_or_else(|| vec!["manifest lacks a config_snapshot entry".to_string()])?;
        let snap_path = dir.join(snapshot);
        let snap_text = fs::read_to_string(&snap_path)
            .map_err(|e| vec![format!("cannot read {}: {e}", snap_path.display())])?;
        return parse_and_validate(&snap_text)
            .map_err(|diags| diags.into_iter().map(|d| d.to_string()).collect());
    }
    parse_and_validate(&text).map_err(|diags| diags.into_iter().map(|d| d.to_string()).collect())
}

fn manifest_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|line| {
        let (k, v) = line.split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}

fn run_parallel(
    cfgs: &[ScenarioConfig],
    workers: usize,
) -> anyhow::Result<Vec<ScenarioResult>> {
    let mut results: Vec<Option<ScenarioResult>> = vec![None; cfgs.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<anyhow::Result<ScenarioResult>>>> =
        (0..cfgs.len()).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(cfgs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= cfgs.len() {
                    break;
                }
                let r = run_scenario(&cfgs[i]).map_err(|e| anyhow!("{e}"));
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    for (i, slot) in slots.into_iter().enumerate() {
        let r = slot
            .into_inner()
            .unwrap()
            .ok_or_else(|| anyhow!("scenario {i} never ran"))??;
        results[i] = Some(r);
    }
    Ok(results.into_iter().map(|r| r.unwrap()).collect())
}

fn write_run_outputs(
    cfg: &ScenarioConfig,
    result: &ScenarioResult,
    out: &Path,
    started: u64,
) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut csv = Vec::new();
    write_timeseries_csv(&result.points, &mut csv)?;
    write_atomic(&out.join("timeseries.csv"), &csv)?;
    write_atomic(
        &out.join("config_snapshot.conf"),
        emit_config(cfg).as_bytes(),
    )?;
    let manifest = format!(
        "[manifest]\nartifact = polstab {}\nmaster_seed = {}\nstarted_unix = {}\nfinished_unix = {}\nconfig_snapshot = config_snapshot.conf\noutput = timeseries.csv\n",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        started,
        unix_now(),
    );
    write_atomic(&out.join("manifest.txt"), manifest.as_bytes())?;
    Ok(())
}

fn summary_row(s: &SweepSummary) -> String {
    // Reference comparison points for the optical error share: 6% through
    // 16π rad/s of sweep rate, 7.5% beyond.
    let ref_limit = if s.rotation_rate_rad_per_s <= 16.0 * std::f64::consts::PI {
        0.06
    } else {
        0.075
    };
    let within = if s.mean_qber_opt <= ref_limit {
        "pass"
    } else {
        "fail"
    };
    format!(
        "{},{:.6},{},{:.9},{:.9},{:.9},{:.9},{},{}\n",
        s.frequency_hz,
        s.rotation_rate_rad_per_s,
        s.points,
        s.mean_qber_opt,
        s.std_qber_opt,
        s.mean_qber_total,
        s.std_qber_total,
        ref_limit,
        within
    )
}

fn sweep_manifest(seed: Option<u64>, freqs: &[f64], outputs: &[String], started: u64) -> String {
    let mut m = format!(
        "[manifest]\nartifact = polstab {}\npreset = scramble-sweep\nstarted_unix = {}\nfinished_unix = {}\n",
        env!("CARGO_PKG_VERSION"),
        started,
        unix_now(),
    );
    match seed {
        Some(s) => m.push_str(&format!("master_seed = {s}\n")),
        None => m.push_str("master_seed = preset\n"),
    }
    m.push_str(&format!(
        "frequencies_hz = {}\n",
        freqs
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    for o in outputs {
        m.push_str(&format!("output = {o}\n"));
    }
    m
}

fn print_run_summary(result: &ScenarioResult) {
    let t = &result.totals;
    println!(
        "points {}, sifted {:.0}/{} pulses, error rates: total {:.4} (opt {:.4}, det {:.4}, side {:.4}), resets {}",
        result.points.len(),
        t.sifted,
        t.sent,
        t.qber_total(),
        t.qber_opt(),
        t.qber_det(),
        t.qber_side(),
        t.resets
    );
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
