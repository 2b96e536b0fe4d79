//! JSON run configuration: the forward model plus training settings.
//!
//! ```json
//! {
//!   "length_unit": "mm",
//!   "mesh": { "nx": 10, "ny": 20, "elem_size": 50 },
//!   "material": { ... }, "neuron": { ... }, "excitation": { ... },
//!   "time": { ... }, "output": { ... },
//!   "training": { "x0": [450000], "bounds": [[400000, 550000]] }
//! }
//! ```
//!
//! With `"length_unit": "mm"` the element size and thickness are given in
//! millimetres and converted on load; everything else is SI.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lbfgsb::{Bounds, LbfgsbOptions};
use crate::objective::DesignScaling;
use crate::simulation::SimConfig;

/// The shipped 10×20 plate experiment.
pub const PLATE_JSON: &str = include_str!("../../../configs/plate.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    #[default]
    M,
    Mm,
}

impl LengthUnit {
    pub fn to_metres(self) -> f64 {
        match self {
            LengthUnit::M => 1.0,
            LengthUnit::Mm => 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSettings {
    /// Initial design; a single value is repeated over all components.
    pub x0: Vec<f64>,
    /// `[lower, upper]` per component, or a single pair for all.
    pub bounds: Vec<[f64; 2]>,
    pub fd_delta: f64,
    pub scaling: DesignScaling,
    /// Concurrent simulations; 0 means one per gradient evaluation (`d + 1`).
    pub workers: usize,
    pub keep_evals: bool,
    pub optimizer: LbfgsbOptions,
}

impl Default for TrainingSettings {
    fn default() -> Self {
        Self {
            x0: vec![450_000.0],
            bounds: vec![[400_000.0, 550_000.0]],
            fd_delta: 1e-2,
            scaling: DesignScaling::Normalized,
            workers: 0,
            keep_evals: false,
            optimizer: LbfgsbOptions::default(),
        }
    }
}

fn expand<T: Clone>(v: &[T], d: usize, what: &str) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); d]),
        n if n == d => Ok(v.to_vec()),
        n => Err(Error::Config(format!(
            "training.{what} has {n} entries; expected 1 or {d}"
        ))),
    }
}

impl TrainingSettings {
    pub fn bounds(&self, d: usize) -> Result<Bounds> {
        let pairs = expand(&self.bounds, d, "bounds")?;
        Bounds::from_pairs(&pairs.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>())
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn x0(&self, d: usize) -> Result<Vec<f64>> {
        expand(&self.x0, d, "x0")
    }

    pub fn workers_for(&self, d: usize) -> usize {
        if self.workers == 0 {
            d + 1
        } else {
            self.workers
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bounds = self.bounds(d)?;
        let x0 = self.x0(d)?;
        check_in_bounds(&x0, &bounds)?;
        if !(self.fd_delta > 0.0) || !self.fd_delta.is_finite() {
            return Err(Error::Config(format!("fd_delta must be positive, got {}", self.fd_delta)));
        }
        self.optimizer.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Rejects any component outside its bounds.
pub fn check_in_bounds(x: &[f64], bounds: &Bounds) -> Result<()> {
    if x.len() != bounds.dim() {
        return Err(Error::Shape {
            expected: bounds.dim(),
            got: x.len(),
        });
    }
    for (i, &v) in x.iter().enumerate() {
        let (lower, upper) = (bounds.lower()[i], bounds.upper()[i]);
        if !(v >= lower && v <= upper) {
            return Err(Error::DesignOutOfBounds {
                index: i,
                value: v,
                lower,
                upper,
            });
        }
    }
    Ok(())
}

/// A parsed configuration file, already converted to SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub length_unit: LengthUnit,
    #[serde(flatten)]
    pub sim: SimConfig,
    #[serde(default)]
    pub training: TrainingSettings,
}

impl RunConfig {
    pub fn design_dim(&self) -> usize {
        self.sim.neuron.design_dim
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        self.training.validate(self.design_dim())
    }
}

/// Parses and validates a configuration; `origin` labels error messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.into(),
        line: e.line(),
        msg: format!("column {}: {e}", e.column()),
    })?;
    let scale = cfg.length_unit.to_metres();
    cfg.sim.mesh.elem_size *= scale;
    cfg.sim.material.thickness *= scale;
    cfg.length_unit = LengthUnit::M;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// The shipped experiment.
pub fn default_run_config() -> RunConfig {
    parse_config(PLATE_JSON, Path::new("configs/plate.json")).expect("shipped config is valid")
}

pub fn default_sim_config() -> SimConfig {
    default_run_config().sim
}
