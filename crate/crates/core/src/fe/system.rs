use std::collections::BTreeSet;

use super::element::{q4_lumped_mass, q4_membrane_stiffness};
use super::material::Material;
use super::sparse::{BandedCholesky, CsrMatrix};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Relative pivot threshold below which the constrained stiffness is treated as singular.
const RANK_TOL: f64 = 1e-10;

/// Assembled structural matrices of a supported mesh.
///
/// Constraints are not applied to `k`, `m` or `c`; they are eliminated when a
/// solver is built from the free DOF list.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    k: CsrMatrix,
    m: Vec<f64>,
    c: CsrMatrix,
    rayleigh: (f64, f64),
    constrained: BTreeSet<usize>,
    free_dofs: Vec<usize>,
}

impl GlobalSystem {
    /// Builds a system from raw parts (stiffness, lumped mass diagonal, Rayleigh
    /// coefficients and constrained DOFs). Used for reduced models and tests.
    pub fn from_parts(
        k: CsrMatrix,
        m: Vec<f64>,
        rayleigh_a0: f64,
        rayleigh_a1: f64,
        constrained: BTreeSet<usize>,
    ) -> Result<Self> {
        let n = k.n();
        if m.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: m.len(),
            });
        }
        if let Some(i) = m.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "lumped mass must be positive, DOF {i} has {}",
                m[i]
            )));
        }
        if let Some(&bad) = constrained.iter().find(|&&d| d >= n) {
            return Err(Error::Index { index: bad, len: n });
        }
        let free_dofs: Vec<usize> = (0..n).filter(|d| !constrained.contains(d)).collect();

        // reject mechanisms up front
        BandedCholesky::factor(&k.submatrix(&free_dofs), RANK_TOL)
            .map_err(|(dof, pivot)| Error::AssemblyRank { dof, pivot })?;

        let c = k.linear_combination(rayleigh_a1, &CsrMatrix::from_diagonal(&m), rayleigh_a0);
        Ok(Self {
            k,
            m,
            c,
            rayleigh: (rayleigh_a0, rayleigh_a1),
            constrained,
            free_dofs,
        })
    }

    pub fn ndof(&self) -> usize {
        self.m.len()
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.k
    }

    /// Diagonal of the lumped mass matrix.
    pub fn mass(&self) -> &[f64] {
        &self.m
    }

    pub fn damping(&self) -> &CsrMatrix {
        &self.c
    }

    pub fn rayleigh(&self) -> (f64, f64) {
        self.rayleigh
    }

    pub fn constrained_dofs(&self) -> &BTreeSet<usize> {
        &self.constrained
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }
}

/// Scatter-adds element stiffness and lumped mass over the mesh.
pub fn assemble_global(mesh: &Mesh, material: &Material) -> Result<GlobalSystem> {
    material.validate()?;
    let ke = q4_membrane_stiffness(mesh.elem_size(), material)?;
    let me = q4_lumped_mass(mesh.elem_size(), material)?;
    let ndof = mesh.ndof();

    let mut triplets = Vec::with_capacity(64 * mesh.element_count());
    let mut mass = vec![0.0; ndof];
    for conn in mesh.connectivity() {
        let dofs: [usize; 8] = std::array::from_fn(|k| 2 * conn[k / 2] + k % 2);
        for (a, &ra) in dofs.iter().enumerate() {
            mass[ra] += me[a];
            for (b, &cb) in dofs.iter().enumerate() {
                triplets.push((ra, cb, ke[(a, b)]));
            }
        }
    }
    let k = CsrMatrix::from_triplets(ndof, triplets);
    GlobalSystem::from_parts(
        k,
        mass,
        material.rayleigh_a0,
        material.rayleigh_a1,
        mesh.constrained_dofs().clone(),
    )
}
