//! End-to-end tests of the `polstab` binary: exit codes, output schema,
//! and manifest-driven reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let path = std::env::temp_dir().join(format!(
            "polstab_cli_{tag}_{}_{}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap()
                .as_nanos()
        ));
        fs::create_dir_all(&path).unwrap();
        Self(path)
    }

    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn small_config() -> String {
    "\
[scenario]
duration_s = 0.4
control_period_s = 0.0001
pulse_rep_rate_hz = 5000000
report_interval_pulses = 500000
mode = analytic
seed = 42

[fiber]
drift_rate_rad_per_s = 1.0
initial = random

[scrambler]
enabled = true
frequency_hz = 2.0

[controller]
enabled = true
"
    .to_string()
}

#[test]
fn run_accepts_builtin_preset() {
    let dir = TempDir::new("preset");
    let out_dir = dir.path().join("out");
    let out = polstab(&[
        "run",
        "static",
        "--out",
        out_dir.to_str().unwrap(),
        "--mode",
        "analytic",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("timeseries.csv").exists());
    assert!(out_dir.join("manifest.txt").exists());
    let snapshot = fs::read_to_string(out_dir.join("config_snapshot.conf")).unwrap();
    // The snapshot carries the preset's published settings.
    assert!(snapshot.contains("mu = 0.1"), "{snapshot}");
    assert!(snapshot.contains("pbs_extinction_db = 22"), "{snapshot}");
    assert!(snapshot.contains("power_dbm = -7.4"), "{snapshot}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("total 0.016"), "{stdout}");
}

fn small_config_path(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("scenario.conf");
    fs::write(&p, small_config()).unwrap();
    p
}

#[test]
fn emitted_csv_reparses_under_schema() {
    let dir = TempDir::new("schema");
    let out_dir = dir.path().join("out");
    let out = polstab(&[
        "run",
        small_config_path(&dir).to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(out_dir.join("timeseries.csv")).unwrap();
    let points = polstab_core::engine::parse_timeseries_csv(&text).unwrap();
    assert_eq!(points.len(), 4);
    for w in points.windows(2) {
        assert!(w[1].t_s > w[0].t_s);
    }
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let dir = TempDir::new("rerun");
    let first = dir.path().join("first");
    let out = polstab(&[
        "run",
        small_config_path(&dir).to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let original = fs::read(first.join("timeseries.csv")).unwrap();

    // Re-run from the manifest itself.
    let second = dir.path().join("second");
    let out = polstab(&[
        "run",
        first.join("manifest.txt").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(original, fs::read(second.join("timeseries.csv")).unwrap());

    // And from the config snapshot directly.
    let third = dir.path().join("third");
    let out = polstab(&[
        "run",
        first.join("config_snapshot.conf").to_str().unwrap(),
        "--out",
        third.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(original, fs::read(third.join("timeseries.csv")).unwrap());
}

#[test]
fn seed_override_is_recorded_and_changes_output() {
    let dir = TempDir::new("seed");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg = small_config_path(&dir);
    assert!(polstab(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()])
        .status
        .success());
    assert!(polstab(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "99",
    ])
    .status
    .success());
    let manifest = fs::read_to_string(b.join("manifest.txt")).unwrap();
    assert!(manifest.contains("master_seed = 99"), "{manifest}");
    assert_ne!(
        fs::read(a.join("timeseries.csv")).unwrap(),
        fs::read(b.join("timeseries.csv")).unwrap()
    );
}

#[test]
fn missing_config_is_a_validation_failure() {
    let out = polstab(&["run", "/nonexistent/missing.conf", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing.conf"), "{stderr}");
}

#[test]
fn validate_reports_every_problem() {
    let dir = TempDir::new("validate");
    let bad = dir.path().join("bad.conf");
    fs::write(
        &bad,
        "\
[scenario]
dark_slot_ns = 300

[references]
s1 = 1,0,0
s3 = -1,0,0

[source]
mu = 0
",
    )
    .unwrap();
    let out = polstab(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("dark slot"), "{stderr}");
    assert!(stderr.to_lowercase().contains("poincar"), "{stderr}");
    assert!(stderr.contains("mu"), "{stderr}");

    let good = dir.path().join("good.conf");
    fs::write(&good, small_config()).unwrap();
    let out = polstab(&["validate", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn scramble_sweep_writes_summary_with_reference_column() {
    let dir = TempDir::new("sweep");
    let out_dir = dir.path().join("out");
    let out = polstab(&[
        "sweep",
        "scramble-sweep",
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("frequency_hz,"));
    assert!(header.ends_with("ref_qber_opt,within_ref"));
    let rows: Vec<&str> = lines.collect();
    let freqs = polstab_core::scenario::default_sweep_frequencies();
    assert_eq!(rows.len(), freqs.len());
    for (row, f) in rows.iter().zip(&freqs) {
        assert!(row.starts_with(&format!("{f},")), "{row}");
        assert!(row.ends_with(",pass") || row.ends_with(",fail"), "{row}");
        assert!(out_dir.join(format!("freq_{f}hz.csv")).exists());
    }
    assert!(out_dir.join("manifest.txt").exists());
}

#[test]
fn sweep_results_are_independent_of_worker_count() {
    let dir = TempDir::new("workers");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out_dir, workers) in [(&a, "1"), (&b, "4")] {
        let out = polstab(&[
            "sweep",
            "scramble-sweep",
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "5",
            "--workers",
            workers,
        ]);
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(a.join("summary.csv")).unwrap(),
        fs::read(b.join("summary.csv")).unwrap()
    );
}

#[test]
fn keyexchange_sweep_labels_four_phases() {
    let dir = TempDir::new("keyexchange");
    let out_dir = dir.path().join("out");
    let out = polstab(&[
        "sweep",
        "keyexchange",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let phases = fs::read_to_string(out_dir.join("phases.csv")).unwrap();
    let lines: Vec<&str> = phases.lines().collect();
    assert_eq!(lines.len(), 5);
    let labels: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(labels, ["a", "b", "c", "d"]);
    // The scrambled-without-control phase collapses toward 50%, the
    // re-stabilized phase recovers.
    let mean_total: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(mean_total[2] > 0.2, "phase c mean {}", mean_total[2]);
    assert!(mean_total[3] < 0.1, "phase d mean {}", mean_total[3]);
    assert!(out_dir.join("timeseries.csv").exists());
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = TempDir::new("unwritable");
    let blocker = dir.path().join("blocked");
    fs::write(&blocker, b"a file, not a directory").unwrap();
    let out = polstab(&[
        "run",
        small_config_path(&dir).to_str().unwrap(),
        "--out",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_sweep_preset_fails_validation() {
    let out = polstab(&["sweep", "nonsense", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(2));
}
