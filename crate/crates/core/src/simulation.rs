//! Time-domain response of the neuro-skin.
//!
//! Each step applies the external excitation at `t + dt` plus the neuro forces
//! evaluated at the displacement of the previous step (staggered coupling),
//! then advances the structure with Newmark-beta.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe::{assemble_global, GlobalSystem, Material, Newmark, NewmarkParams};
use crate::io;
use crate::mesh::{build_grid_mesh, Direction, DofMap, Mesh};
use crate::neuro::{add_neuro_forces, broadcast_design, ActivationKind, NeuroLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    HalfSine,
    Sine,
    Step,
}

/// Point loads applied with a common time history to a set of nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    pub nodes: Vec<usize>,
    pub direction: Direction,
    /// Force per node, N.
    pub amplitude: f64,
    pub waveform: Waveform,
    pub t_start: f64,
    pub t_end: f64,
    /// Only used by [`Waveform::Sine`], Hz.
    #[serde(default)]
    pub frequency: f64,
}

pub fn excitation_force(spec: &Excitation, t: f64) -> f64 {
    if t < spec.t_start || t > spec.t_end {
        return 0.0;
    }
    let tau = t - spec.t_start;
    match spec.waveform {
        Waveform::HalfSine => {
            spec.amplitude * (std::f64::consts::PI * tau / (spec.t_end - spec.t_start)).sin()
        }
        Waveform::Sine => spec.amplitude * (2.0 * std::f64::consts::PI * spec.frequency * tau).sin(),
        Waveform::Step => spec.amplitude,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub nx: usize,
    pub ny: usize,
    /// Cell side, m.
    pub elem_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub activation: ActivationKind,
    /// Dendrite weights, 1/m.
    pub input_weights: [f64; 4],
    /// Output weight used when no design vector is supplied, Pa.
    pub output_weight: f64,
    pub design_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeParams {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_beta() -> f64 {
    NewmarkParams::default().beta
}

fn default_gamma() -> f64 {
    NewmarkParams::default().gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputProbe {
    pub node: usize,
    pub direction: Direction,
}

/// Everything needed for one forward run, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mesh: MeshParams,
    pub material: Material,
    pub neuron: NeuronParams,
    pub excitation: Excitation,
    pub time: TimeParams,
    pub output: OutputProbe,
}

impl SimConfig {
    pub fn element_count(&self) -> usize {
        self.mesh.nx * self.mesh.ny
    }

    pub fn newmark(&self) -> NewmarkParams {
        NewmarkParams {
            beta: self.time.beta,
            gamma: self.time.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mesh = build_grid_mesh(self.mesh.nx, self.mesh.ny, self.mesh.elem_size)?;
        self.validate_against(&mesh)
    }

    fn validate_against(&self, mesh: &Mesh) -> Result<()> {
        self.material.validate()?;
        self.newmark().validate()?;
        let invalid = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.time.dt > 0.0) || !self.time.dt.is_finite() {
            return invalid(format!("dt must be positive, got {}", self.time.dt));
        }
        if self.time.n_steps == 0 {
            return invalid("n_steps must be at least 1".into());
        }
        if self.output.node >= mesh.node_count() {
            return Err(Error::Index {
                index: self.output.node,
                len: mesh.node_count(),
            });
        }
        let ex = &self.excitation;
        if !(ex.t_start >= 0.0) || !(ex.t_end > ex.t_start) {
            return invalid(format!(
                "excitation window must satisfy 0 <= t_start < t_end, got [{}, {}]",
                ex.t_start, ex.t_end
            ));
        }
        if !ex.amplitude.is_finite() || !ex.frequency.is_finite() {
            return invalid("excitation amplitude and frequency must be finite".into());
        }
        for &node in &ex.nodes {
            if node >= mesh.node_count() {
                return Err(Error::Index {
                    index: node,
                    len: mesh.node_count(),
                });
            }
            if mesh.constrained_dofs().contains(&DofMap::dof(node, ex.direction)) {
                return invalid(format!("excitation node {node} is supported"));
            }
        }
        let d = self.neuron.design_dim;
        if d == 0 || mesh.element_count() % d != 0 {
            return Err(Error::Divisibility {
                dim: d,
                elements: mesh.element_count(),
            });
        }
        if self.neuron.input_weights.iter().any(|w| !w.is_finite())
            || !self.neuron.output_weight.is_finite()
        {
            return invalid("neuron weights must be finite".into());
        }
        Ok(())
    }
}

/// Uniformly sampled scalar history; sample `i` sits at `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Root mean square amplitude.
    pub fn rms(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }
}

/// Assembled and factored model, reusable across runs with different output weights.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    mesh: Arc<Mesh>,
    integrator: Newmark,
    excitation_dofs: Vec<usize>,
    output_dof: usize,
}

impl Simulator {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let mesh = build_grid_mesh(config.mesh.nx, config.mesh.ny, config.mesh.elem_size)?;
        config.validate_against(&mesh)?;
        let system: GlobalSystem = assemble_global(&mesh, &config.material)?;
        let integrator = Newmark::new(system, config.time.dt, config.newmark())?;
        let excitation_dofs = config
            .excitation
            .nodes
            .iter()
            .map(|&n| DofMap::dof(n, config.excitation.direction))
            .collect();
        Ok(Self {
            output_dof: DofMap::dof(config.output.node, config.output.direction),
            config: config.clone(),
            mesh: Arc::new(mesh),
            integrator,
            excitation_dofs,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn system(&self) -> &GlobalSystem {
        self.integrator.system()
    }

    fn load(&self, t: f64, f: &mut [f64]) {
        f.iter_mut().for_each(|v| *v = 0.0);
        let p = excitation_force(&self.config.excitation, t);
        for &d in &self.excitation_dofs {
            f[d] += p;
        }
    }

    /// Runs from rest with per-element output weights `w_o`.
    pub fn run(&self, w_o: &[f64]) -> Result<TimeSeries> {
        let p = self.mesh.element_count();
        if w_o.len() != p {
            return Err(Error::Shape {
                expected: p,
                got: w_o.len(),
            });
        }
        let neuron = &self.config.neuron;
        let layout = NeuroLayout::new(neuron.activation, neuron.input_weights, w_o.to_vec(), 1)?;
        let ndof = self.mesh.ndof();
        let dt = self.config.time.dt;
        let n_steps = self.config.time.n_steps;

        let mut f = vec![0.0; ndof];
        self.load(0.0, &mut f);
        let zeros = vec![0.0; ndof];
        let mut state = self.integrator.initial_state(0.0, &zeros, &zeros, &f)?;

        let mut values = Vec::with_capacity(n_steps);
        for step in 1..=n_steps {
            self.load(step as f64 * dt, &mut f);
            add_neuro_forces(&self.mesh, &layout, &state.u, &mut f)?;
            state = self.integrator.step(&state, &f)?;
            if state.u.iter().chain(&state.v).any(|x| !x.is_finite()) {
                return Err(Error::SimulationDiverged { step });
            }
            values.push(state.u[self.output_dof]);
        }
        Ok(TimeSeries { t0: dt, dt, values })
    }

    /// Runs with the broadcast of design vector `x`.
    pub fn run_design(&self, x: &[f64]) -> Result<TimeSeries> {
        self.run(&broadcast_design(x, self.mesh.element_count())?)
    }
}

pub fn simulate(config: &SimConfig, w_o: &[f64]) -> Result<TimeSeries> {
    Simulator::new(config)?.run(w_o)
}

pub const PARAMS_FILE: &str = "params.csv";
pub const OUTPUT_FILE: &str = "output.out";

/// Writes `params.csv`, simulates the broadcast of `x` and writes `output.out`
/// inside `run_dir`.
pub fn run_and_write(run_dir: &Path, config: &SimConfig, x: &[f64]) -> Result<TimeSeries> {
    run_and_write_with(&Simulator::new(config)?, run_dir, x)
}

pub fn run_and_write_with(sim: &Simulator, run_dir: &Path, x: &[f64]) -> Result<TimeSeries> {
    std::fs::create_dir_all(run_dir).map_err(|e| Error::io(run_dir, e))?;
    let w_o = broadcast_design(x, sim.mesh().element_count())?;
    io::write_params(&run_dir.join(PARAMS_FILE), &w_o)?;
    let series = sim.run(&w_o)?;
    io::write_series(&run_dir.join(OUTPUT_FILE), &series.values)?;
    Ok(series)
}
