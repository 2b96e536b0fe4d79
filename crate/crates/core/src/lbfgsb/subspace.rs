//! Direct primal minimization of the quadratic model over the variables the
//! Cauchy point leaves free.

use nalgebra::{DMatrix, DVector};

use super::memory::LimitedMemory;

/// Returns the subspace minimizer `x̄`; falls back to the Cauchy point when
/// there are no free variables or the reduced system is singular.
pub(crate) fn subspace_minimum(
    x: &DVector<f64>,
    g: &DVector<f64>,
    lower: &[f64],
    upper: &[f64],
    xcp: &DVector<f64>,
    c: &DVector<f64>,
    mem: &LimitedMemory,
) -> DVector<f64> {
    let free: Vec<usize> = (0..x.len())
        .filter(|&i| xcp[i] > lower[i] && xcp[i] < upper[i])
        .collect();
    if free.is_empty() {
        return xcp.clone();
    }
    let theta = mem.theta();
    let nf = free.len();

    // reduced gradient of the model at xcp
    let mut r = g + (xcp - x) * theta;
    if !mem.is_empty() {
        r -= mem.w() * (mem.mid() * c);
    }
    let rc = DVector::from_fn(nf, |j, _| r[free[j]]);

    let du = if mem.is_empty() {
        -&rc / theta
    } else {
        let w = mem.w();
        let mid = mem.mid();
        let k2 = w.ncols();
        // WᵀZ, 2k × nf
        let wtz = DMatrix::from_fn(k2, nf, |i, j| w[(free[j], i)]);
        let v = mid * (&wtz * &rc);
        let n_mat = DMatrix::identity(k2, k2) - (mid * (&wtz * wtz.transpose())) / theta;
        match n_mat.lu().solve(&v) {
            Some(v) => -&rc / theta - wtz.transpose() * v / (theta * theta),
            None => return xcp.clone(),
        }
    };

    let mut xbar = xcp.clone();
    for (j, &i) in free.iter().enumerate() {
        xbar[i] = (xcp[i] + du[j]).clamp(lower[i], upper[i]);
    }
    if (&xbar - x).dot(g) < 0.0 {
        return xbar;
    }

    // projection lost descent: truncate the step at the first bound instead
    let mut alpha = 1.0_f64;
    for (j, &i) in free.iter().enumerate() {
        if du[j] > 0.0 {
            alpha = alpha.min((upper[i] - xcp[i]) / du[j]);
        } else if du[j] < 0.0 {
            alpha = alpha.min((lower[i] - xcp[i]) / du[j]);
        }
    }
    let mut xbar = xcp.clone();
    for (j, &i) in free.iter().enumerate() {
        xbar[i] = (xcp[i] + alpha * du[j]).clamp(lower[i], upper[i]);
    }
    xbar
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_model_minimizer_when_interior() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let mut mem = LimitedMemory::new(5, 2);
        for s in [[1.0, 0.0], [0.3, 1.0]] {
            let s = DVector::from_vec(s.to_vec());
            mem.push(s.clone(), &a * s);
        }
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let g = DVector::from_vec(vec![1.0, -2.0]);
        let (lo, hi) = ([-1e15; 2], [1e15; 2]);
        let cp = super::super::cauchy::cauchy_point(&x, &g, &lo, &hi, &mem);
        let xbar = subspace_minimum(&x, &g, &lo, &hi, &cp.xcp, &cp.c, &mem);
        let b = super::super::memory::tests::dense(&mem, 2);
        let newton = &x - b.lu().solve(&g).unwrap();
        assert!((xbar - newton).norm() < 1e-10);
    }

    #[test]
    fn no_free_variables_returns_cauchy_point() {
        let mem = LimitedMemory::new(5, 1);
        let x = DVector::from_vec(vec![0.0]);
        let g = DVector::from_vec(vec![1.0]);
        let xcp = x.clone();
        let c = DVector::zeros(0);
        assert_eq!(subspace_minimum(&x, &g, &[0.0], &[1.0], &xcp, &c, &mem), xcp);
    }
}
