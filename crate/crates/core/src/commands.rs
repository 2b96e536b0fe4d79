//! The four workflows behind the command-line tool: target generation,
//! training, re-evaluation of logged iterates and single forward runs.
//!
//! A training run directory holds
//!
//! ```text
//! manifest.json   config hash, options and output paths, written first
//! result.csv      iter, x_0.., rmse, mse (start point is row 0)
//! summary.json    xopt, fopt, status, evaluation count, wall time
//! evals/<k>/      params.csv and output.out per evaluation slot (--keep-evals)
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{check_in_bounds, parse_config, RunConfig, PLATE_JSON};
use crate::error::{Error, Result};
use crate::io::{self, ResultLog, ResultRow};
use crate::lbfgsb::{minimize, Bounds, LbfgsbOptions, Status};
use crate::objective::{DesignScaling, RunDirPlant, SimPlant, TrainingProblem};
use crate::simulation::{run_and_write_with, Simulator, OUTPUT_FILE, PARAMS_FILE};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULT_FILE: &str = "result.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const EVALS_DIR: &str = "evals";

/// A parsed configuration together with the exact bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub origin: String,
    pub text: String,
    pub config: RunConfig,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = parse_config(&text, path)?;
        Ok(Self {
            origin: path.display().to_string(),
            text,
            config,
        })
    }

    /// The shipped plate experiment.
    pub fn builtin() -> Self {
        let config = parse_config(PLATE_JSON, Path::new("configs/plate.json")).expect("shipped config is valid");
        Self {
            origin: "<builtin configs/plate.json>".into(),
            text: PLATE_JSON.into(),
            config,
        }
    }

    /// Wraps an in-memory configuration; the hash covers its JSON form.
    pub fn from_config(config: RunConfig) -> Result<Self> {
        let text = serde_json::to_string_pretty(&config).map_err(|e| Error::Config(e.to_string()))?;
        let config = parse_config(&text, Path::new("<memory>"))?;
        Ok(Self {
            origin: "<memory>".into(),
            text,
            config,
        })
    }

    pub fn load_or_builtin(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::builtin()), Self::load)
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }
}

/// Command-line adjustments of the training section.
#[derive(Debug, Clone, Default)]
pub struct TrainingOverrides {
    pub workers: Option<usize>,
    pub fd_delta: Option<f64>,
    pub scaling: Option<DesignScaling>,
    pub maxiter: Option<usize>,
    pub maxfun: Option<usize>,
    pub factr: Option<f64>,
    pub pgtol: Option<f64>,
    pub keep_evals: bool,
}

impl TrainingOverrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let t = &mut cfg.training;
        if let Some(v) = self.workers {
            t.workers = v;
        }
        if let Some(v) = self.fd_delta {
            t.fd_delta = v;
        }
        if let Some(v) = self.scaling {
            t.scaling = v;
        }
        let o = &mut t.optimizer;
        if let Some(v) = self.maxiter {
            o.maxiter = v;
        }
        if let Some(v) = self.maxfun {
            o.maxfun = v;
        }
        if let Some(v) = self.factr {
            o.factr = v;
        }
        if let Some(v) = self.pgtol {
            o.pgtol = v;
        }
        t.keep_evals |= self.keep_evals;
        t.validate(cfg.sim.neuron.design_dim)
    }
}

/// Design values from the command line: `d` values are broadcast, a single
/// value is repeated.
fn design_vector(cfg: &RunConfig, w: &[f64]) -> Result<Vec<f64>> {
    let d = cfg.design_dim();
    match w.len() {
        1 => Ok(vec![w[0]; d]),
        n if n == d => Ok(w.to_vec()),
        n => Err(Error::Config(format!("expected 1 or {d} design values, got {n}"))),
    }
}

fn read_target(cfg: &RunConfig, path: &Path) -> Result<Vec<f64>> {
    let target = io::read_series(path)?;
    if target.len() != cfg.sim.time.n_steps {
        return Err(Error::Config(format!(
            "{}: target has {} samples but n_steps is {}",
            path.display(),
            target.len(),
            cfg.sim.time.n_steps
        )));
    }
    Ok(target)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetInfo {
    pub n: usize,
    pub rms: f64,
}

/// Simulates `w_star` and writes the output series to `out`.
pub fn gen_target(loaded: &LoadedConfig, w_star: &[f64], out: &Path) -> Result<TargetInfo> {
    let cfg = &loaded.config;
    let x = design_vector(cfg, w_star)?;
    check_in_bounds(&x, &cfg.training.bounds(cfg.design_dim())?)?;
    let series = Simulator::new(&cfg.sim)?.run_design(&x)?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    io::write_series(out, &series.values)?;
    Ok(TargetInfo {
        n: series.len(),
        rms: series.rms(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub result: PathBuf,
    pub summary: PathBuf,
    pub evals: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub config_sha256: String,
    pub target_path: PathBuf,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub design_dim: usize,
    pub scaling: DesignScaling,
    pub fd_delta: f64,
    pub workers: usize,
    pub bounds: Bounds,
    pub x0: Vec<f64>,
    pub optimizer: LbfgsbOptions,
    pub outputs: OutputPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub xopt: Vec<f64>,
    pub fopt: f64,
    pub status: Status,
    pub message: String,
    pub iterations: usize,
    pub n_evaluations: usize,
    pub wall_time_s: f64,
    /// Design at which the run aborted, when it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_at: Option<Vec<f64>>,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub summary: TrainSummary,
    pub rows: Vec<ResultRow>,
}

/// Runs the training loop into `out_dir`.
///
/// An aborted optimization still writes `result.csv` and `summary.json`
/// before the cause is returned as the error.
pub fn train(loaded: &LoadedConfig, target_path: &Path, out_dir: &Path) -> Result<TrainOutcome> {
    let cfg = &loaded.config;
    let d = cfg.design_dim();
    let target = read_target(cfg, target_path)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let outputs = OutputPaths {
        result: out_dir.join(RESULT_FILE),
        summary: out_dir.join(SUMMARY_FILE),
        evals: out_dir.join(EVALS_DIR),
    };
    let bounds = cfg.training.bounds(d)?;
    let x0 = cfg.training.x0(d)?;
    let manifest = RunManifest {
        command: "train".into(),
        config_path: loaded.origin.clone(),
        config_sha256: loaded.sha256(),
        target_path: target_path.into(),
        started_at: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |t| t.as_secs()),
        design_dim: d,
        scaling: cfg.training.scaling,
        fd_delta: cfg.training.fd_delta,
        workers: cfg.training.workers_for(d),
        bounds: bounds.clone(),
        x0: x0.clone(),
        optimizer: cfg.training.optimizer,
        outputs: outputs.clone(),
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    let start = Instant::now();

    if outputs.evals.exists() {
        fs::remove_dir_all(&outputs.evals).map_err(|e| Error::io(&outputs.evals, e))?;
    }
    let problem = TrainingProblem::with_plant(
        RunDirPlant::new(&cfg.sim, &outputs.evals)?,
        target,
        bounds,
        cfg.training.fd_delta,
        cfg.training.scaling,
        cfg.training.workers_for(d),
    )?;

    let mut log = ResultLog::create(&outputs.result, d)?;
    let mut logged = vec![x0.clone()];
    log.append(&ResultRow {
        iter: 0,
        x: x0.clone(),
        rmse: None,
        mse: None,
    })?;

    let mut last_eval = Vec::new();
    let result = minimize(
        |xi| {
            last_eval = problem.to_physical(xi);
            let r = problem.objective_and_gradient(xi)?;
            Ok((r.f, r.g))
        },
        &problem.to_optimizer(&x0),
        &problem.optimizer_bounds(),
        &cfg.training.optimizer,
        |xi| {
            let x = problem.to_physical(xi);
            log.append(&ResultRow {
                iter: logged.len(),
                x: x.clone(),
                rmse: None,
                mse: None,
            })?;
            logged.push(x);
            Ok(())
        },
    )?;
    drop(log);

    // re-evaluate the logged iterates and rewrite the file with both errors
    let mut rows = Vec::with_capacity(logged.len());
    let mut batch_error = None;
    for (k, (x, r)) in logged.iter().zip(problem.evaluate_batch(&logged)).enumerate() {
        let (rmse, mse) = match r {
            Ok((r, m)) => (Some(r), Some(m)),
            Err(e) => {
                batch_error.get_or_insert(e);
                (None, None)
            }
        };
        rows.push(ResultRow {
            iter: k,
            x: x.clone(),
            rmse,
            mse,
        });
    }
    io::write_results(&outputs.result, &rows)?;

    if !cfg.training.keep_evals && outputs.evals.exists() {
        fs::remove_dir_all(&outputs.evals).map_err(|e| Error::io(&outputs.evals, e))?;
    }

    let aborted = result.status == Status::Aborted;
    let message = match &result.error {
        Some(e) => format!("{}: {e}", result.status),
        None => result.status.to_string(),
    };
    let summary = TrainSummary {
        xopt: problem.to_physical(&result.x),
        fopt: result.f,
        status: result.status,
        message,
        iterations: result.iterations,
        n_evaluations: result.n_evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
        failed_at: aborted.then_some(last_eval),
    };
    write_json(&outputs.summary, &summary)?;

    if let Some(e) = result.error {
        return Err(e);
    }
    if let Some(e) = batch_error {
        return Err(e);
    }
    Ok(TrainOutcome { summary, rows })
}

/// Recomputes rmse and mse for every row of `result_file` and rewrites it.
pub fn evaluate(loaded: &LoadedConfig, target_path: &Path, result_file: &Path) -> Result<Vec<ResultRow>> {
    let cfg = &loaded.config;
    let d = cfg.design_dim();
    let target = read_target(cfg, target_path)?;
    let mut rows = io::read_results(result_file, d)?;
    if rows.is_empty() {
        return Err(Error::Config(format!("{}: no iterates", result_file.display())));
    }
    let problem = TrainingProblem::with_plant(
        SimPlant::new(&cfg.sim)?,
        target,
        cfg.training.bounds(d)?,
        cfg.training.fd_delta,
        cfg.training.scaling,
        cfg.training.workers_for(d),
    )?;
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| r.x.clone()).collect();
    for (row, r) in rows.iter_mut().zip(problem.evaluate_batch(&xs)) {
        let (rmse, mse) = r?;
        row.rmse = Some(rmse);
        row.mse = Some(mse);
    }
    io::write_results(result_file, &rows)?;
    Ok(rows)
}

/// Per-element weights for a forward run.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSource {
    /// `training`-style design vector (1 or `d` values).
    Design(Vec<f64>),
    /// `params.csv` with one weight per element.
    ParamsFile(PathBuf),
    /// The config's `neuron.output_weight` everywhere.
    ConfigDefault,
}

/// Single forward run writing `output.out` and `params.csv` into `out_dir`.
pub fn simulate(loaded: &LoadedConfig, weights: &WeightSource, out_dir: &Path) -> Result<TargetInfo> {
    let cfg = &loaded.config;
    let sim = Simulator::new(&cfg.sim)?;
    let series = match weights {
        WeightSource::Design(w) => run_and_write_with(&sim, out_dir, &design_vector(cfg, w)?)?,
        WeightSource::ConfigDefault => {
            run_and_write_with(&sim, out_dir, &[cfg.sim.neuron.output_weight])?
        }
        WeightSource::ParamsFile(path) => {
            let w_o = io::read_params(path)?;
            if w_o.len() != cfg.sim.element_count() {
                return Err(Error::Shape {
                    expected: cfg.sim.element_count(),
                    got: w_o.len(),
                });
            }
            let series = sim.run(&w_o)?;
            fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
            io::write_params(&out_dir.join(PARAMS_FILE), &w_o)?;
            io::write_series(&out_dir.join(OUTPUT_FILE), &series.values)?;
            series
        }
    };
    Ok(TargetInfo {
        n: series.len(),
        rms: series.rms(),
    })
}
