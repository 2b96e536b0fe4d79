//! Bound-constrained limited-memory BFGS (L-BFGS-B).
//!
//! Each iteration computes the generalized Cauchy point of the compact
//! quasi-Newton model on the box, minimizes the model over the variables
//! left free, and searches along the resulting direction for a point
//! satisfying the strong Wolfe conditions.

mod cauchy;
mod line_search;
mod memory;
mod subspace;

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use line_search::{strong_wolfe, Search, WolfeParams};
use memory::LimitedMemory;

/// Box `lower <= x <= upper`; infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Shape {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || !(l < u) {
                return Err(Error::InvalidArgument(format!(
                    "bound {i}: lower {l} must be below upper {u}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Same interval for each of `d` variables.
    pub fn uniform(d: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; d], vec![upper; d])
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }
}

/// Componentwise clamp onto the box.
pub fn project(x: &[f64], bounds: &Bounds) -> Vec<f64> {
    x.iter()
        .zip(bounds.lower.iter().zip(&bounds.upper))
        .map(|(&v, (&l, &u))| v.clamp(l, u))
        .collect()
}

/// Infinity norm of the projected gradient `P(x − g) − x`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &Bounds) -> f64 {
    let mut norm = 0.0_f64;
    for i in 0..x.len() {
        let gi = g[i];
        let pg = if gi < 0.0 {
            (x[i] - bounds.upper[i]).max(gi)
        } else {
            (x[i] - bounds.lower[i]).min(gi)
        };
        norm = norm.max(pg.abs());
    }
    norm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LbfgsbOptions {
    /// Number of correction pairs kept.
    pub history_size: usize,
    /// Stop when the relative reduction falls below `factr · ε`.
    pub factr: f64,
    /// Stop when the projected gradient infinity norm is at most this.
    pub pgtol: f64,
    /// Objective evaluation budget.
    pub maxfun: usize,
    pub maxiter: usize,
    /// Evaluations allowed per line search.
    pub ls_max: usize,
}

impl Default for LbfgsbOptions {
    fn default() -> Self {
        Self {
            history_size: 10,
            factr: 1e12,
            pgtol: 1e-5,
            maxfun: 100,
            maxiter: 5,
            ls_max: 20,
        }
    }
}

impl LbfgsbOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("optimizer option {what}")));
        if self.history_size == 0 {
            return bad("history_size must be at least 1");
        }
        if !(self.factr > 0.0) || !self.factr.is_finite() {
            return bad("factr must be positive");
        }
        if !(self.pgtol >= 0.0) || !self.pgtol.is_finite() {
            return bad("pgtol must be non-negative");
        }
        if self.maxfun == 0 || self.maxiter == 0 || self.ls_max == 0 {
            return bad("maxfun, maxiter and ls_max must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iteration: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub pg_norm: f64,
    pub n_evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Relative reduction below `factr · ε`.
    ConvergedFactr,
    /// Projected gradient below `pgtol`.
    ConvergedPgtol,
    MaxIter,
    MaxFun,
    /// The line search found no decrease even from a steepest-descent
    /// restart; the best point so far is returned.
    LineSearchFailed,
    /// The objective failed or returned non-finite values.
    Aborted,
}

impl Status {
    pub fn is_converged(self) -> bool {
        matches!(self, Self::ConvergedFactr | Self::ConvergedPgtol)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ConvergedFactr => "converged: relative reduction below factr*eps",
            Self::ConvergedPgtol => "converged: projected gradient below pgtol",
            Self::MaxIter => "stopped: iteration limit",
            Self::MaxFun => "stopped: evaluation limit",
            Self::LineSearchFailed => "degraded: line search failed",
            Self::Aborted => "aborted",
        })
    }
}

#[derive(Debug)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub n_evaluations: usize,
    /// Starting point first, then every accepted iterate.
    pub trace: Vec<IterateRecord>,
    /// Cause of an [`Status::Aborted`] run.
    pub error: Option<Error>,
}

/// Minimizes `valgrad` over the box starting from `project(x0)`.
///
/// `on_iterate` sees each accepted iterate; an error from it aborts the run.
pub fn minimize<F, C>(
    mut valgrad: F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &LbfgsbOptions,
    mut on_iterate: C,
) -> Result<MinimizeResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    C: FnMut(&[f64]) -> Result<()>,
{
    opts.validate()?;
    let n = bounds.dim();
    if x0.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: x0.len(),
        });
    }
    let (lower, upper) = (bounds.lower(), bounds.upper());
    let boxed = lower.iter().chain(upper).all(|b| b.is_finite());

    let mut nfev = 0usize;
    let mut eval = |x: &[f64], nfev: &mut usize| -> Result<(f64, DVector<f64>)> {
        *nfev += 1;
        let (f, g) = valgrad(x)?;
        if g.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: g.len(),
            });
        }
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::OptimizerAbort(format!(
                "non-finite objective or gradient at x = {x:?} (f = {f})"
            )));
        }
        Ok((f, DVector::from_vec(g)))
    };

    let mut x = DVector::from_vec(project(x0, bounds));
    let (mut f, mut g) = match eval(x.as_slice(), &mut nfev) {
        Ok(v) => v,
        Err(e) => {
            return Ok(MinimizeResult {
                x: x.as_slice().to_vec(),
                f: f64::NAN,
                g: vec![f64::NAN; n],
                status: Status::Aborted,
                iterations: 0,
                n_evaluations: nfev,
                trace: Vec::new(),
                error: Some(e),
            })
        }
    };
    let mut trace = vec![IterateRecord {
        iteration: 0,
        x: x.as_slice().to_vec(),
        f,
        pg_norm: projected_gradient_norm(x.as_slice(), g.as_slice(), bounds),
        n_evaluations: nfev,
    }];

    let mut mem = LimitedMemory::new(opts.history_size, n);
    let mut iter = 0usize;
    let mut error = None;
    let mut restarted = false;

    let status = loop {
        if projected_gradient_norm(x.as_slice(), g.as_slice(), bounds) <= opts.pgtol {
            break Status::ConvergedPgtol;
        }
        if iter >= opts.maxiter {
            break Status::MaxIter;
        }
        if nfev >= opts.maxfun {
            break Status::MaxFun;
        }

        let cp = cauchy::cauchy_point(&x, &g, lower, upper, &mem);
        let xbar = subspace::subspace_minimum(&x, &g, lower, upper, &cp.xcp, &cp.c, &mem);
        let d = &xbar - &x;
        let dphi0 = g.dot(&d);
        if !(dphi0 < 0.0) {
            if mem.is_empty() {
                break Status::LineSearchFailed;
            }
            mem.clear();
            continue;
        }

        // largest feasible step along d; xbar is feasible so this is ≥ 1
        let mut alpha_max = f64::INFINITY;
        for i in 0..n {
            if d[i] > 0.0 {
                alpha_max = alpha_max.min((upper[i] - x[i]) / d[i]);
            } else if d[i] < 0.0 {
                alpha_max = alpha_max.min((lower[i] - x[i]) / d[i]);
            }
        }
        // unit-length first step unless every variable is boxed
        let alpha0 = if iter == 0 && !boxed {
            (1.0 / d.norm()).min(alpha_max)
        } else {
            1.0f64.min(alpha_max)
        };

        let budget = opts.ls_max.min(opts.maxfun - nfev);
        let search = strong_wolfe(
            |alpha| {
                let mut xt = &x + &d * alpha;
                for i in 0..n {
                    xt[i] = xt[i].clamp(lower[i], upper[i]);
                }
                let (ft, gt) = eval(xt.as_slice(), &mut nfev)?;
                let dphi = gt.dot(&d);
                Ok((ft, dphi, (xt, gt)))
            },
            f,
            dphi0,
            alpha0,
            alpha_max,
            budget,
            WolfeParams::default(),
        );
        let trial = match search {
            Ok(Search::Wolfe(t)) | Ok(Search::Decrease(t)) => t,
            Ok(Search::Failed) => {
                if mem.is_empty() || restarted {
                    break if nfev >= opts.maxfun {
                        Status::MaxFun
                    } else {
                        Status::LineSearchFailed
                    };
                }
                mem.clear();
                restarted = true;
                continue;
            }
            Err(e) => {
                error = Some(e);
                break Status::Aborted;
            }
        };
        restarted = false;

        let (x_new, g_new) = trial.payload;
        mem.push(&x_new - &x, &g_new - &g);
        let f_old = f;
        x = x_new;
        g = g_new;
        f = trial.f;
        iter += 1;
        trace.push(IterateRecord {
            iteration: iter,
            x: x.as_slice().to_vec(),
            f,
            pg_norm: projected_gradient_norm(x.as_slice(), g.as_slice(), bounds),
            n_evaluations: nfev,
        });
        if let Err(e) = on_iterate(x.as_slice()) {
            error = Some(e);
            break Status::Aborted;
        }
        if f_old - f <= opts.factr * f64::EPSILON * f_old.abs().max(f.abs()).max(1.0) {
            break Status::ConvergedFactr;
        }
    };

    Ok(MinimizeResult {
        x: x.as_slice().to_vec(),
        f,
        g: g.as_slice().to_vec(),
        status,
        iterations: iter,
        n_evaluations: nfev,
        trace,
        error,
    })
}
