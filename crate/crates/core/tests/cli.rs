use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use neuroskin::commands::{RESULT_FILE, SUMMARY_FILE};
use neuroskin::config::{default_run_config, RunConfig};
use neuroskin::io::{read_results, read_series};
use neuroskin::simulation::MeshParams;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neuroskin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_config() -> RunConfig {
    let mut cfg = default_run_config();
    cfg.sim.mesh = MeshParams {
        nx: 2,
        ny: 4,
        elem_size: 0.05,
    };
    cfg.sim.excitation.nodes = vec![13];
    cfg.sim.output.node = 14;
    cfg.sim.time.n_steps = 60;
    cfg.training.optimizer.maxiter = 4;
    cfg
}

fn write_config(dir: &Path, name: &str, cfg: &RunConfig) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_with_builtin_config() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    let o = run(&["simulate", "--w", "450000", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_series(&out.join("output.out")).unwrap().len(), 500);
    let text = fs::read_to_string(out.join("output.out")).unwrap();
    assert_eq!(text.lines().count(), 500);
    assert!(out.join("params.csv").exists());

    let o = run(&["simulate", "--out", s(&dir.path().join("default"))]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn malformed_config_reports_location() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"mesh\": ,\n}\n").unwrap();
    let o = run(&["simulate", "--config", s(&path), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:2"), "{}", stderr(&o));
}

#[test]
fn gen_target_rejects_out_of_bounds_design() {
    let dir = TempDir::new().unwrap();
    let o = run(&["gen-target", "--w", "390000", "--out", s(&dir.path().join("t.out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("design out of bounds"), "{}", stderr(&o));
    assert!(!dir.path().join("t.out").exists());
}

#[test]
fn zero_amplitude_target_is_all_zeros() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_config();
    cfg.sim.excitation.amplitude = 0.0;
    let config = write_config(dir.path(), "c.json", &cfg);
    let target = dir.path().join("t.out");
    let o = run(&["gen-target", "--config", s(&config), "--w", "500000", "--out", s(&target)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let y = read_series(&target).unwrap();
    assert_eq!(y.len(), 60);
    assert!(y.iter().all(|v| *v == 0.0));
}

#[test]
fn evaluate_rejects_empty_file() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "c.json", &small_config());
    let target = dir.path().join("t.out");
    assert!(run(&["gen-target", "--config", s(&config), "--w", "500000", "--out", s(&target)]).status.success());
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = run(&["evaluate", "--config", s(&config), "--target", s(&target), "--results", s(&empty)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("no iterates"), "{}", stderr(&o));
}

#[test]
fn target_length_mismatch_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "c.json", &small_config());
    let target = dir.path().join("t.out");
    fs::write(&target, "0.0\n1.0\n").unwrap();
    let o = run(&["train", "--config", s(&config), "--target", s(&target), "--out", s(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn train_evaluate_and_rerun() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "c.json", &small_config());
    let target = dir.path().join("t.out");
    assert!(run(&["gen-target", "--config", s(&config), "--w", "500000", "--out", s(&target)]).status.success());
    let out = dir.path().join("run");
    let train = |extra: &[&str]| {
        let mut args = vec!["train", "--config", s(&config), "--target", s(&target), "--out", s(&out)];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };

    let stdout = train(&[]);
    assert!(stdout.contains("xopt") && stdout.contains("fopt"));
    let results = out.join(RESULT_FILE);
    let rows = read_results(&results, 1).unwrap();
    assert!(rows.len() >= 2);
    assert_eq!(rows[0].x, [450_000.0]);
    for w in rows.windows(2) {
        assert!(w[1].rmse.unwrap() <= w[0].rmse.unwrap());
    }
    for r in &rows {
        let (rmse, mse) = (r.rmse.unwrap(), r.mse.unwrap());
        assert!((rmse - mse.sqrt()).abs() <= 1e-12 * rmse.max(1e-300));
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join(SUMMARY_FILE)).unwrap()).unwrap();
    let fopt = summary["fopt"].as_f64().unwrap();
    assert_eq!(rows.last().unwrap().rmse.unwrap(), fopt);
    assert!(!out.join("evals").exists());

    // evaluating the logged trace reproduces the logged errors
    let before = fs::read_to_string(&results).unwrap();
    let o = run(&["evaluate", "--config", s(&config), "--target", s(&target), "--results", s(&results)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&results).unwrap(), before);

    // a rerun with fewer iterations replaces the file rather than appending
    train(&["--maxiter", "1", "--keep-evals"]);
    let rerun = read_results(&results, 1).unwrap();
    assert_eq!(rerun.len(), 2);
    assert_eq!(rerun[..], rows[..2]);
    assert!(out.join("evals").is_dir());
}

#[test]
fn round_trip_from_the_generating_design() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_config();
    cfg.training.x0 = vec![500_000.0];
    cfg.training.optimizer.maxiter = 1;
    let config = write_config(dir.path(), "c.json", &cfg);
    let target = dir.path().join("t.out");
    assert!(run(&["gen-target", "--config", s(&config), "--w", "500000", "--out", s(&target)]).status.success());
    let out = dir.path().join("run");
    let o = run(&["train", "--config", s(&config), "--target", s(&target), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_results(&out.join(RESULT_FILE), 1).unwrap();
    assert_eq!(rows[0].rmse, Some(0.0));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["fopt"].as_f64(), Some(0.0));
    assert!(summary["iterations"].as_u64().unwrap() <= 1);
}

#[test]
fn training_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_config();
    cfg.sim.neuron.design_dim = 2;
    cfg.training.x0 = vec![450_000.0];
    let config = write_config(dir.path(), "c.json", &cfg);
    let target = dir.path().join("t.out");
    assert!(run(&["gen-target", "--config", s(&config), "--w", "430000,520000", "--out", s(&target)])
        .status
        .success());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["train", "--config", s(&config), "--target", s(&target), "--out", s(&out), "--workers", "3"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join(SUMMARY_FILE)).unwrap()).unwrap();
        summary.as_object_mut().unwrap().remove("wall_time_s");
        outputs.push((fs::read(out.join(RESULT_FILE)).unwrap(), summary));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bad_flags_fail() {
    let o = run(&["train", "--scaling", "log"]);
    assert!(!o.status.success());
    let o = run(&["simulate", "--w", "1", "--params", "p.csv", "--out", "x"]);
    assert!(!o.status.success());
}
