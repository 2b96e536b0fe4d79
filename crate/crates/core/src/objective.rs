//! Training objective and its forward-difference gradient.
//!
//! The objective is the RMSE between the plant output and the target series.
//! A gradient call runs `d + 1` independent simulations (the base point and
//! one perturbation per component) on a bounded worker pool and joins them in
//! index order, so results do not depend on the number of workers.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{check_in_bounds, RunConfig};
use crate::error::{Error, Result};
use crate::lbfgsb::Bounds;
use crate::simulation::{run_and_write_with, SimConfig, Simulator};

pub fn mse(yhat: &[f64], y: &[f64]) -> Result<f64> {
    if yhat.len() != y.len() {
        return Err(Error::Shape {
            expected: y.len(),
            got: yhat.len(),
        });
    }
    if y.is_empty() {
        return Ok(0.0);
    }
    let ss: f64 = yhat.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ss / y.len() as f64)
}

pub fn rmse(yhat: &[f64], y: &[f64]) -> Result<f64> {
    mse(yhat, y).map(f64::sqrt)
}

/// Coordinates the optimizer works in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignScaling {
    /// Physical output weights, perturbed by an absolute `fd_delta`.
    Raw,
    /// `[0, 1]^d` mapped affinely onto the bounds.
    #[default]
    Normalized,
}

/// Anything producing an output series from a physical design vector.
///
/// `slot` names the evaluation within a batch (`"0"` .. `"d"` for a gradient
/// call) so file-backed plants can keep per-evaluation directories.
pub trait Plant: Sync {
    fn output_len(&self) -> usize;
    fn response(&self, slot: &str, x: &[f64]) -> Result<Vec<f64>>;
}

/// In-memory simulation of the neuro-skin.
#[derive(Debug, Clone)]
pub struct SimPlant {
    sim: Arc<Simulator>,
}

impl SimPlant {
    pub fn new(config: &SimConfig) -> Result<Self> {
        Ok(Self {
            sim: Arc::new(Simulator::new(config)?),
        })
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }
}

impl Plant for SimPlant {
    fn output_len(&self) -> usize {
        self.sim.config().time.n_steps
    }

    fn response(&self, _slot: &str, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.sim.run_design(x)?.values)
    }
}

/// Simulation that also leaves `params.csv` and `output.out` in
/// `root/<slot>/` for every evaluation.
#[derive(Debug, Clone)]
pub struct RunDirPlant {
    sim: Arc<Simulator>,
    root: PathBuf,
}

impl RunDirPlant {
    pub fn new(config: &SimConfig, root: impl Into<PathBuf>) -> Result<Self> {
        Ok(Self {
            sim: Arc::new(Simulator::new(config)?),
            root: root.into(),
        })
    }

    pub fn root(&self) -> &std::path::Path {
        &self.root
    }
}

impl Plant for RunDirPlant {
    fn output_len(&self) -> usize {
        self.sim.config().time.n_steps
    }

    fn response(&self, slot: &str, x: &[f64]) -> Result<Vec<f64>> {
        Ok(run_and_write_with(&self.sim, &self.root.join(slot), x)?.values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// RMSE at the base point.
    pub f: f64,
    pub mse: f64,
    /// Forward-difference gradient in optimizer coordinates.
    pub g: Vec<f64>,
    pub n_sims: usize,
}

pub struct TrainingProblem<P: Plant = SimPlant> {
    plant: P,
    target: Vec<f64>,
    bounds: Bounds,
    fd_delta: f64,
    scaling: DesignScaling,
    workers: usize,
    pool: rayon::ThreadPool,
}

impl TrainingProblem<SimPlant> {
    /// Problem described by a run configuration with in-memory simulations.
    pub fn from_config(cfg: &RunConfig, target: Vec<f64>) -> Result<Self> {
        let d = cfg.design_dim();
        Self::with_plant(
            SimPlant::new(&cfg.sim)?,
            target,
            cfg.training.bounds(d)?,
            cfg.training.fd_delta,
            cfg.training.scaling,
            cfg.training.workers_for(d),
        )
    }
}

impl<P: Plant> TrainingProblem<P> {
    pub fn with_plant(
        plant: P,
        target: Vec<f64>,
        bounds: Bounds,
        fd_delta: f64,
        scaling: DesignScaling,
        workers: usize,
    ) -> Result<Self> {
        if target.len() != plant.output_len() {
            return Err(Error::Config(format!(
                "target has {} samples but the simulation produces {}",
                target.len(),
                plant.output_len()
            )));
        }
        if !(fd_delta > 0.0) || !fd_delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "finite-difference step must be positive, got {fd_delta}"
            )));
        }
        if scaling == DesignScaling::Normalized
            && bounds.lower().iter().chain(bounds.upper()).any(|b| !b.is_finite())
        {
            return Err(Error::InvalidArgument(
                "normalized scaling needs finite bounds".into(),
            ));
        }
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        Ok(Self {
            plant,
            target,
            bounds,
            fd_delta,
            scaling,
            workers,
            pool,
        })
    }

    pub fn plant(&self) -> &P {
        &self.plant
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn design_dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Physical bounds of the design.
    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn scaling(&self) -> DesignScaling {
        self.scaling
    }

    pub fn fd_delta(&self) -> f64 {
        self.fd_delta
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Bounds in optimizer coordinates.
    pub fn optimizer_bounds(&self) -> Bounds {
        match self.scaling {
            DesignScaling::Raw => self.bounds.clone(),
            DesignScaling::Normalized => {
                Bounds::uniform(self.design_dim(), 0.0, 1.0).expect("unit box is valid")
            }
        }
    }

    pub fn to_physical(&self, xi: &[f64]) -> Vec<f64> {
        match self.scaling {
            DesignScaling::Raw => xi.to_vec(),
            DesignScaling::Normalized => xi
                .iter()
                .zip(self.bounds.lower().iter().zip(self.bounds.upper()))
                .map(|(&s, (&l, &u))| l + s * (u - l))
                .collect(),
        }
    }

    pub fn to_optimizer(&self, x: &[f64]) -> Vec<f64> {
        match self.scaling {
            DesignScaling::Raw => x.to_vec(),
            DesignScaling::Normalized => x
                .iter()
                .zip(self.bounds.lower().iter().zip(self.bounds.upper()))
                .map(|(&v, (&l, &u))| (v - l) / (u - l))
                .collect(),
        }
    }

    fn errors(&self, x: &[f64], slot: &str) -> Result<(f64, f64)> {
        let y = self.plant.response(slot, x)?;
        let m = mse(&y, &self.target)?;
        Ok((m.sqrt(), m))
    }

    /// RMSE and forward-difference gradient at `xi` (optimizer coordinates).
    ///
    /// Evaluation `0` is the base point and evaluation `i + 1` perturbs
    /// component `i`; failures are reported with that index.
    pub fn objective_and_gradient(&self, xi: &[f64]) -> Result<EvalResult> {
        check_in_bounds(xi, &self.optimizer_bounds())?;
        let d = xi.len();
        let points: Vec<Vec<f64>> = (0..=d)
            .map(|k| {
                let mut p = xi.to_vec();
                if k > 0 {
                    p[k - 1] += self.fd_delta;
                }
                self.to_physical(&p)
            })
            .collect();
        let results: Vec<Result<(f64, f64)>> = self.pool.install(|| {
            points
                .par_iter()
                .enumerate()
                .map(|(k, x)| self.errors(x, &k.to_string()))
                .collect()
        });
        let mut values = Vec::with_capacity(d + 1);
        for (k, r) in results.into_iter().enumerate() {
            values.push(r.map_err(|e| Error::Evaluation {
                index: k,
                source: Box::new(e),
            })?);
        }
        let (f, m) = values[0];
        let g = values[1..].iter().map(|(fi, _)| (fi - f) / self.fd_delta).collect();
        Ok(EvalResult {
            f,
            mse: m,
            g,
            n_sims: d + 1,
        })
    }

    /// Bounds check allowing the last-bit slack of the normalized mapping.
    fn check_physical(&self, x: &[f64]) -> Result<()> {
        let slack: Vec<(f64, f64)> = self
            .bounds
            .lower()
            .iter()
            .zip(self.bounds.upper())
            .map(|(&l, &u)| {
                let tol = 1e-12 * (u - l).abs().min(f64::MAX);
                (l - tol, u + tol)
            })
            .collect();
        check_in_bounds(x, &Bounds::from_pairs(&slack)?).map_err(|e| match e {
            Error::DesignOutOfBounds { index, value, .. } => Error::DesignOutOfBounds {
                index,
                value,
                lower: self.bounds.lower()[index],
                upper: self.bounds.upper()[index],
            },
            other => other,
        })
    }

    /// `(rmse, mse)` for each physical design vector, evaluated concurrently;
    /// a failing item does not stop the others.
    pub fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Vec<Result<(f64, f64)>> {
        self.pool.install(|| {
            xs.par_iter()
                .enumerate()
                .map(|(k, x)| {
                    self.check_physical(x)?;
                    self.errors(x, &format!("batch{k}")).map_err(|e| Error::Evaluation {
                        index: k,
                        source: Box::new(e),
                    })
                })
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Output `[h(x)]` against target `[0]`, so the RMSE is `|h(x)|`.
    struct Surrogate<F: Fn(&[f64]) -> f64 + Sync>(F);

    impl<F: Fn(&[f64]) -> f64 + Sync> Plant for Surrogate<F> {
        fn output_len(&self) -> usize {
            1
        }
        fn response(&self, _: &str, x: &[f64]) -> Result<Vec<f64>> {
            let v = (self.0)(x);
            if v.is_finite() {
                Ok(vec![v])
            } else {
                Err(Error::SimulationDiverged { step: 7 })
            }
        }
    }

    fn raw<F: Fn(&[f64]) -> f64 + Sync>(h: F, d: usize, delta: f64) -> TrainingProblem<Surrogate<F>> {
        TrainingProblem::with_plant(
            Surrogate(h),
            vec![0.0],
            Bounds::uniform(d, -100.0, 100.0).unwrap(),
            delta,
            DesignScaling::Raw,
            d + 1,
        )
        .unwrap()
    }

    #[test]
    fn rmse_and_mse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 3.5355339059327378);
        assert_eq!(mse(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 12.5);
        assert_eq!(rmse(&[2.5; 7], &[-0.5; 7]).unwrap(), 3.0);
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn square_surrogate_forward_difference() {
        let p = raw(|x| x[0] * x[0], 1, 0.01);
        let r = p.objective_and_gradient(&[3.0]).unwrap();
        assert_eq!(r.f, 9.0);
        assert_eq!(r.n_sims, 2);
        assert!((r.g[0] - 6.01).abs() < 1e-12, "{}", r.g[0]);
    }

    #[test]
    fn affine_surrogate_gradient_is_exact() {
        let a = [3.0, -1.0, 2.0];
        for delta in [0.25, 0.5, 2.0] {
            let p = raw(move |x| 100.0 + a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>(), 3, delta);
            let r = p.objective_and_gradient(&[1.0, 2.0, 3.0]).unwrap();
            assert_eq!(r.g, a);
        }
    }

    #[test]
    fn normalized_coordinates() {
        let p = TrainingProblem::with_plant(
            Surrogate(|x: &[f64]| x[0] - 450.0),
            vec![0.0],
            Bounds::uniform(1, 400.0, 550.0).unwrap(),
            1e-2,
            DesignScaling::Normalized,
            1,
        )
        .unwrap();
        assert_eq!(p.to_physical(&[0.5]), [475.0]);
        assert_eq!(p.to_optimizer(&[400.0]), [0.0]);
        let r = p.objective_and_gradient(&[0.5]).unwrap();
        assert_eq!(r.f, 25.0);
        // d f / d xi = 150 on an affine response
        assert!((r.g[0] - 150.0).abs() < 1e-9);
        assert!(matches!(
            p.objective_and_gradient(&[1.5]),
            Err(Error::DesignOutOfBounds { .. })
        ));
    }

    #[test]
    fn failures_name_the_evaluation() {
        let p = raw(|x| if x[1] > 1.005 { f64::NAN } else { x[0] }, 2, 0.01);
        match p.objective_and_gradient(&[1.0, 1.0]) {
            Err(Error::Evaluation { index, source }) => {
                assert_eq!(index, 2);
                assert!(matches!(*source, Error::SimulationDiverged { step: 7 }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn batch_is_ordered_and_isolates_failures() {
        let p = raw(|x| if x[0] < 0.0 { f64::NAN } else { x[0] }, 1, 0.01);
        let out = p.evaluate_batch(&[vec![2.0], vec![-1.0], vec![2.0], vec![500.0]]);
        assert_eq!(out[0].as_ref().unwrap(), &(2.0, 4.0));
        assert!(matches!(out[1], Err(Error::Evaluation { index: 1, .. })));
        assert_eq!(out[2].as_ref().unwrap(), out[0].as_ref().unwrap());
        assert!(matches!(out[3], Err(Error::DesignOutOfBounds { .. })));
        let r = p.objective_and_gradient(&[2.0]).unwrap();
        assert_eq!(r.f, p.evaluate_batch(&[vec![2.0]])[0].as_ref().unwrap().0);
    }

    #[test]
    fn target_length_is_checked() {
        let r = TrainingProblem::with_plant(
            Surrogate(|_: &[f64]| 0.0),
            vec![0.0, 1.0],
            Bounds::uniform(1, 0.0, 1.0).unwrap(),
            1e-2,
            DesignScaling::Raw,
            1,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
