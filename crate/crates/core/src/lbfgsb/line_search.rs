//! Bracketing and zoom line search for the strong Wolfe conditions.
//!
//! Only points satisfying the sufficient-decrease condition are ever
//! returned, so accepted steps never increase the objective.

/// A trial step with its objective, directional derivative and whatever the
/// caller attached to the evaluation (typically the point and full gradient).
#[derive(Debug, Clone)]
#[allow(dead_code)]
pub(crate) struct Trial<T> {
    pub alpha: f64,
    pub f: f64,
    pub dphi: f64,
    pub payload: T,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    /// Relative width of the bracket at which zooming stops.
    pub xtol: f64,
}

impl Default for WolfeParams {
    fn default() -> Self {
        Self {
            c1: 1e-3,
            c2: 0.9,
            xtol: 0.1,
        }
    }
}

#[derive(Debug)]
pub(crate) enum Search<T> {
    /// Strong Wolfe point.
    Wolfe(Trial<T>),
    /// Sufficient decrease only: the maximum step, a collapsed bracket, or
    /// the evaluation budget ran out.
    Decrease(Trial<T>),
    /// No step with sufficient decrease was found.
    Failed,
}

/// Searches `φ(α) = f(x + α d)` on `(0, alpha_max]` starting at `alpha0`.
///
/// `eval` returns `(φ(α), φ'(α), payload)`; errors abort the search.
pub(crate) fn strong_wolfe<T, E>(
    mut eval: impl FnMut(f64) -> Result<(f64, f64, T), E>,
    f0: f64,
    dphi0: f64,
    alpha0: f64,
    alpha_max: f64,
    max_evals: usize,
    params: WolfeParams,
) -> Result<Search<T>, E> {
    debug_assert!(dphi0 < 0.0);
    let WolfeParams { c1, c2, xtol } = params;
    let armijo = |a: f64, f: f64| f <= f0 + c1 * a * dphi0;
    let curvature = |d: f64| d.abs() <= c2 * dphi0.abs();

    let mut evals = 0usize;
    let mut best: Option<Trial<T>> = None;
    let keep = |best: &mut Option<Trial<T>>, t: Trial<T>| {
        if best.as_ref().map_or(true, |b| t.f < b.f) {
            *best = Some(t);
        }
    };
    let finish = |best: Option<Trial<T>>| match best {
        Some(t) => Search::Decrease(t),
        None => Search::Failed,
    };

    // bracketing phase
    let mut lo = (0.0, f0, dphi0);
    let mut alpha = alpha0.min(alpha_max);
    let hi;
    loop {
        if evals >= max_evals {
            return Ok(finish(best));
        }
        let (f, d, payload) = eval(alpha)?;
        evals += 1;
        let trial = Trial { alpha, f, dphi: d, payload };
        if !f.is_finite() || !armijo(alpha, f) || (evals > 1 && f >= lo.1) {
            hi = (alpha, f, d);
            break;
        }
        if curvature(d) {
            return Ok(Search::Wolfe(trial));
        }
        if d >= 0.0 {
            hi = lo;
            lo = (alpha, f, d);
            keep(&mut best, trial);
            break;
        }
        lo = (alpha, f, d);
        keep(&mut best, trial);
        if alpha >= alpha_max {
            return Ok(finish(best));
        }
        alpha = (4.0 * alpha).min(alpha_max);
    }

    // zoom phase: lo satisfies sufficient decrease, [lo, hi] brackets a Wolfe point
    let mut hi = hi;
    loop {
        let width = (hi.0 - lo.0).abs();
        if width <= xtol * lo.0.max(hi.0) || width <= f64::EPSILON * lo.0.max(hi.0).max(1e-300) {
            return Ok(finish(best));
        }
        if evals >= max_evals {
            return Ok(finish(best));
        }
        let alpha = interpolate(lo, hi);
        let (f, d, payload) = eval(alpha)?;
        evals += 1;
        let trial = Trial { alpha, f, dphi: d, payload };
        if !f.is_finite() || !armijo(alpha, f) || f >= lo.1 {
            hi = (alpha, f, d);
            continue;
        }
        if curvature(d) {
            return Ok(Search::Wolfe(trial));
        }
        if d * (hi.0 - lo.0) >= 0.0 {
            hi = lo;
        }
        lo = (alpha, f, d);
        keep(&mut best, trial);
    }
}

/// Safeguarded cubic interpolation between the bracket ends, falling back
/// to bisection.
fn interpolate(lo: (f64, f64, f64), hi: (f64, f64, f64)) -> f64 {
    let (a0, f0, g0) = lo;
    let (a1, f1, g1) = hi;
    let (left, right) = (a0.min(a1), a0.max(a1));
    let margin = 0.1 * (right - left);
    let mid = 0.5 * (a0 + a1);
    if !f1.is_finite() || !g1.is_finite() {
        return mid;
    }
    let d1 = g0 + g1 - 3.0 * (f0 - f1) / (a0 - a1);
    let disc = d1 * d1 - g0 * g1;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (a1 - a0).signum() * disc.sqrt();
    let denom = g1 - g0 + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let a = a1 - (a1 - a0) * (g1 + d2 - d1) / denom;
    if a.is_finite() && a > left + margin && a < right - margin {
        a
    } else {
        mid
    }
}
