//! Generalized Cauchy point along the projected steepest-descent path.

use nalgebra::DVector;

use super::memory::LimitedMemory;

/// Cauchy point of the quadratic model together with `c = Wᵀ(xcp − x)`,
/// which the subspace step reuses.
pub(crate) struct CauchyPoint {
    pub xcp: DVector<f64>,
    pub c: DVector<f64>,
}

pub(crate) fn cauchy_point(
    x: &DVector<f64>,
    g: &DVector<f64>,
    lower: &[f64],
    upper: &[f64],
    mem: &LimitedMemory,
) -> CauchyPoint {
    let n = x.len();
    let theta = mem.theta();
    let w = mem.w();
    let mid = mem.mid();
    let k2 = w.ncols();

    let mut breaks = vec![f64::INFINITY; n];
    let mut d = DVector::zeros(n);
    for i in 0..n {
        let t = if g[i] < 0.0 {
            (x[i] - upper[i]) / g[i]
        } else if g[i] > 0.0 {
            (x[i] - lower[i]) / g[i]
        } else {
            f64::INFINITY
        };
        breaks[i] = t;
        if t > 0.0 {
            d[i] = -g[i];
        }
    }

    let mut order: Vec<usize> = (0..n).filter(|&i| breaks[i] > 0.0 && breaks[i].is_finite()).collect();
    // stable: equal breakpoints keep ascending index order
    order.sort_by(|&a, &b| breaks[a].total_cmp(&breaks[b]));

    let mut xcp = x.clone();
    for i in 0..n {
        if breaks[i] <= 0.0 {
            xcp[i] = if g[i] < 0.0 { upper[i] } else { lower[i] };
        }
    }

    let mut p: DVector<f64> = w.transpose() * &d;
    let mut c = DVector::zeros(k2);
    let mut fp = -d.dot(&d);
    let mut fpp = -theta * fp;
    if k2 > 0 {
        fpp -= p.dot(&(mid * &p));
    }
    let step = |fp: f64, fpp: f64| {
        if fp >= 0.0 {
            0.0
        } else if fpp > 0.0 {
            -fp / fpp
        } else {
            f64::INFINITY
        }
    };
    let mut dt_min = step(fp, fpp);
    let mut t_old = 0.0;

    for &b in &order {
        let t = breaks[b];
        let dt = t - t_old;
        if dt_min < dt {
            break;
        }
        xcp[b] = if d[b] > 0.0 { upper[b] } else { lower[b] };
        let zb = xcp[b] - x[b];
        let gb = g[b];
        c += &p * dt;
        fp += dt * fpp + gb * gb + theta * gb * zb;
        if k2 > 0 {
            let wb = w.row(b).transpose();
            let mwb = mid * &wb;
            fp -= gb * mwb.dot(&c);
            fpp -= theta * gb * gb + 2.0 * gb * mwb.dot(&p) + gb * gb * wb.dot(&mwb);
            p += &wb * gb;
        } else {
            fpp -= theta * gb * gb;
        }
        d[b] = 0.0;
        t_old = t;
        dt_min = step(fp, fpp);
    }

    let dt_min = dt_min.max(0.0);
    if dt_min.is_finite() {
        t_old += dt_min;
        for i in 0..n {
            if d[i] != 0.0 {
                xcp[i] = (x[i] + t_old * d[i]).clamp(lower[i], upper[i]);
            }
        }
        c += &p * dt_min;
    } else {
        // unbounded model along the path: stop at the last breakpoint
        for i in 0..n {
            if d[i] != 0.0 {
                xcp[i] = (x[i] + t_old * d[i]).clamp(lower[i], upper[i]);
            }
        }
    }
    // recompute c from the final point so it is exact regardless of path
    let c = if k2 > 0 { w.transpose() * (&xcp - x) } else { c };
    CauchyPoint { xcp, c }
}
