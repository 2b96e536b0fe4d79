//! Reference implementations shared by the integration tests.

use nalgebra::DMatrix;

/// Stiffness of an axis-aligned `a × a` square integrated directly in
/// physical coordinates with a 3-point Gauss rule per direction. Node order
/// (0,0), (a,0), (a,a), (0,a).
pub fn square_stiffness_oracle(a: f64, e: f64, nu: f64, t: f64) -> DMatrix<f64> {
    let c = e / (1.0 - nu * nu);
    let d = DMatrix::from_row_slice(3, 3, &[c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0]);
    let pts = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let wts = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut k = DMatrix::zeros(8, 8);
    for (gx, wx) in pts.iter().zip(wts) {
        for (gy, wy) in pts.iter().zip(wts) {
            let x = a * (gx + 1.0) / 2.0;
            let y = a * (gy + 1.0) / 2.0;
            // N1 = (a-x)(a-y)/a², N2 = x(a-y)/a², N3 = xy/a², N4 = (a-x)y/a²
            let dndx = [-(a - y), a - y, y, -y].map(|v| v / (a * a));
            let dndy = [-(a - x), -x, x, a - x].map(|v| v / (a * a));
            let mut b = DMatrix::zeros(3, 8);
            for n in 0..4 {
                b[(0, 2 * n)] = dndx[n];
                b[(1, 2 * n + 1)] = dndy[n];
                b[(2, 2 * n)] = dndy[n];
                b[(2, 2 * n + 1)] = dndx[n];
            }
            let jac = a * a / 4.0;
            k += b.transpose() * &d * b * (t * wx * wy * jac);
        }
    }
    k
}
