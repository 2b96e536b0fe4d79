//! Bilinear four-node membrane element.
//!
//! DOF order inside an element is `(u_x1, u_y1, ..., u_x4, u_y4)` following the
//! counter-clockwise node order of the connectivity.

use nalgebra::SMatrix;

use super::material::Material;
use crate::error::{Error, Result};

pub type ElementMatrix = SMatrix<f64, 8, 8>;

const GAUSS_2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

/// Shape function derivatives with respect to `(xi, eta)` at a natural point.
fn natural_derivatives(xi: f64, eta: f64) -> [[f64; 4]; 2] {
    let mut d = [[0.0; 4]; 2];
    for k in 0..4 {
        d[0][k] = 0.25 * XI[k] * (1.0 + ETA[k] * eta);
        d[1][k] = 0.25 * ETA[k] * (1.0 + XI[k] * xi);
    }
    d
}

/// Plane-stress stiffness of an arbitrary convex quadrilateral, 2x2 Gauss rule.
pub fn quad4_stiffness(coords: &[[f64; 2]; 4], material: &Material) -> Result<ElementMatrix> {
    material.validate()?;
    let d = material.plane_stress_d();
    let t = material.thickness;
    let mut k = ElementMatrix::zeros();

    for &xi in &GAUSS_2 {
        for &eta in &GAUSS_2 {
            let dn = natural_derivatives(xi, eta);
            // Jacobian J[a][b] = d x_b / d xi_a
            let mut jac = [[0.0; 2]; 2];
            for n in 0..4 {
                for a in 0..2 {
                    jac[a][0] += dn[a][n] * coords[n][0];
                    jac[a][1] += dn[a][n] * coords[n][1];
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if !(det > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "element Jacobian is not positive ({det}); check node ordering"
                )));
            }
            let inv = [
                [jac[1][1] / det, -jac[0][1] / det],
                [-jac[1][0] / det, jac[0][0] / det],
            ];
            // physical derivatives dN/dx, dN/dy
            let mut dx = [0.0; 4];
            let mut dy = [0.0; 4];
            for n in 0..4 {
                dx[n] = inv[0][0] * dn[0][n] + inv[0][1] * dn[1][n];
                dy[n] = inv[1][0] * dn[0][n] + inv[1][1] * dn[1][n];
            }
            let mut b = [[0.0; 8]; 3];
            for n in 0..4 {
                b[0][2 * n] = dx[n];
                b[1][2 * n + 1] = dy[n];
                b[2][2 * n] = dy[n];
                b[2][2 * n + 1] = dx[n];
            }
            let mut db = [[0.0; 8]; 3];
            for r in 0..3 {
                for c in 0..8 {
                    db[r][c] = d[r][0] * b[0][c] + d[r][1] * b[1][c] + d[r][2] * b[2][c];
                }
            }
            let w = det * t;
            for i in 0..8 {
                for j in i..8 {
                    let v = b[0][i] * db[0][j] + b[1][i] * db[1][j] + b[2][i] * db[2][j];
                    k[(i, j)] += w * v;
                }
            }
        }
    }
    // mirror the upper triangle so the matrix is bitwise symmetric
    for i in 0..8 {
        for j in 0..i {
            k[(i, j)] = k[(j, i)];
        }
    }
    Ok(k)
}

/// Stiffness of a square element of side `elem_size`.
pub fn q4_membrane_stiffness(elem_size: f64, material: &Material) -> Result<ElementMatrix> {
    if !(elem_size > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "element size must be positive, got {elem_size}"
        )));
    }
    let a = elem_size;
    quad4_stiffness(&[[0.0, 0.0], [a, 0.0], [a, a], [0.0, a]], material)
}

/// Row-sum lumped mass of a square element: a quarter of the element mass on
/// every DOF. Returned as the 8 diagonal entries.
pub fn q4_lumped_mass(elem_size: f64, material: &Material) -> Result<[f64; 8]> {
    material.validate()?;
    if !(elem_size > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "element size must be positive, got {elem_size}"
        )));
    }
    let m = material.density * material.thickness * elem_size * elem_size / 4.0;
    Ok([m; 8])
}
