//! Newmark-beta time stepping on the free DOFs of a [`GlobalSystem`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sparse::{singular, BandedCholesky, CsrMatrix};
use super::system::GlobalSystem;
use crate::error::{Error, Result};

/// Kinematic state; constrained DOFs stay identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DynState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

impl DynState {
    pub fn at_rest(ndof: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; ndof],
            v: vec![0.0; ndof],
            a: vec![0.0; ndof],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewmarkParams {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for NewmarkParams {
    /// Average acceleration (trapezoidal) rule.
    fn default() -> Self {
        Self {
            beta: 0.25,
            gamma: 0.5,
        }
    }
}

impl NewmarkParams {
    pub fn validate(&self) -> Result<()> {
        let Self { beta, gamma } = *self;
        if !(gamma >= 0.5) || !(2.0 * beta >= gamma) {
            return Err(Error::InvalidArgument(format!(
                "Newmark parameters must satisfy 2*beta >= gamma >= 1/2, got beta = {beta}, gamma = {gamma}"
            )));
        }
        Ok(())
    }
}

/// Integrator with the effective stiffness
/// `K + gamma/(beta dt) C + 1/(beta dt²) M` factored once for a fixed step.
#[derive(Debug, Clone)]
pub struct Newmark {
    system: Arc<GlobalSystem>,
    dt: f64,
    params: NewmarkParams,
    mass_free: Vec<f64>,
    damping_free: CsrMatrix,
    factor: BandedCholesky,
}

impl Newmark {
    pub fn new(system: impl Into<Arc<GlobalSystem>>, dt: f64, params: NewmarkParams) -> Result<Self> {
        let system = system.into();
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        params.validate()?;
        let free = system.free_dofs();
        let NewmarkParams { beta, gamma } = params;
        let mass_free: Vec<f64> = free.iter().map(|&d| system.mass()[d]).collect();
        let damping_free = system.damping().submatrix(free);
        let k_free = system.stiffness().submatrix(free);
        let k_eff = k_free
            .linear_combination(1.0, &damping_free, gamma / (beta * dt))
            .linear_combination(
                1.0,
                &CsrMatrix::from_diagonal(&mass_free),
                1.0 / (beta * dt * dt),
            );
        let factor = BandedCholesky::factor(&k_eff, 1e-14).map_err(singular)?;
        Ok(Self {
            system,
            dt,
            params,
            mass_free,
            damping_free,
            factor,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn system(&self) -> &GlobalSystem {
        &self.system
    }

    pub fn params(&self) -> NewmarkParams {
        self.params
    }

    /// State at `t0` with displacement `u0`, velocity `v0` and acceleration
    /// solved from equilibrium under `f0`.
    pub fn initial_state(&self, t0: f64, u0: &[f64], v0: &[f64], f0: &[f64]) -> Result<DynState> {
        let n = self.system.ndof();
        for v in [u0, v0, f0] {
            if v.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        for &d in self.system.free_dofs() {
            u[d] = u0[d];
            v[d] = v0[d];
        }
        let ku = self.system.stiffness().mul_vec(&u);
        let cv = self.system.damping().mul_vec(&v);
        let mut a = vec![0.0; n];
        for &d in self.system.free_dofs() {
            a[d] = (f0[d] - ku[d] - cv[d]) / self.system.mass()[d];
        }
        Ok(DynState { t: t0, u, v, a })
    }

    /// Advances one step under the external load `f_next` evaluated at `t + dt`.
    pub fn step(&self, state: &DynState, f_next: &[f64]) -> Result<DynState> {
        let n = self.system.ndof();
        if f_next.len() != n || state.u.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: f_next.len().min(state.u.len()),
            });
        }
        let NewmarkParams { beta, gamma } = self.params;
        let dt = self.dt;
        let free = self.system.free_dofs();
        let nf = free.len();

        let m_u = 1.0 / (beta * dt * dt);
        let m_v = 1.0 / (beta * dt);
        let m_a = 1.0 / (2.0 * beta) - 1.0;
        let c_u = gamma / (beta * dt);
        let c_v = gamma / beta - 1.0;
        let c_a = dt * (gamma / (2.0 * beta) - 1.0);

        let mut c_arg = vec![0.0; nf];
        for (i, &d) in free.iter().enumerate() {
            c_arg[i] = c_u * state.u[d] + c_v * state.v[d] + c_a * state.a[d];
        }
        let c_term = self.damping_free.mul_vec(&c_arg);

        let mut rhs = vec![0.0; nf];
        for (i, &d) in free.iter().enumerate() {
            let inertial = m_u * state.u[d] + m_v * state.v[d] + m_a * state.a[d];
            rhs[i] = f_next[d] + self.mass_free[i] * inertial + c_term[i];
        }
        self.factor.solve_in_place(&mut rhs);

        let mut next = DynState::at_rest(n);
        next.t = state.t + dt;
        for (i, &d) in free.iter().enumerate() {
            let u1 = rhs[i];
            let a1 = m_u * (u1 - state.u[d]) - m_v * state.v[d] - m_a * state.a[d];
            let v1 = state.v[d] + dt * ((1.0 - gamma) * state.a[d] + gamma * a1);
            next.u[d] = u1;
            next.v[d] = v1;
            next.a[d] = a1;
        }
        Ok(next)
    }
}

/// Single Newmark step. Factors the effective matrix on every call; use
/// [`Newmark`] directly when stepping repeatedly with a fixed `dt`.
pub fn newmark_step(
    system: &GlobalSystem,
    state: &DynState,
    f_ext: &[f64],
    dt: f64,
    beta: f64,
    gamma: f64,
) -> Result<DynState> {
    Newmark::new(system.clone(), dt, NewmarkParams { beta, gamma })?.step(state, f_ext)
}

/// `½ vᵀMv + ½ uᵀKu`.
pub fn mechanical_energy(system: &GlobalSystem, state: &DynState) -> f64 {
    let ku = system.stiffness().mul_vec(&state.u);
    let kinetic: f64 = state
        .v
        .iter()
        .zip(system.mass())
        .map(|(v, m)| m * v * v)
        .sum();
    let strain: f64 = state.u.iter().zip(&ku).map(|(u, f)| u * f).sum();
    0.5 * (kinetic + strain)
}
