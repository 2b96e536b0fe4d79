//! Neuro-elements: one neuron per cell turning nodal `u_x` into a traction.
//!
//! The neuron potential is `z = Σ w_in[k] · u_x[k]` over the four cell nodes.
//! The bounded activation `f(z)` is scaled by the output weight `w_o` (Pa) and
//! the cell area, and the resulting force is split equally over the four
//! nodes along `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Tanh,
    BipolarSigmoid,
    HardLimit,
    SaturatingLinear,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] = [
        ActivationKind::Tanh,
        ActivationKind::BipolarSigmoid,
        ActivationKind::HardLimit,
        ActivationKind::SaturatingLinear,
    ];

    /// Evaluates without the finiteness check of [`activation_eval`].
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            ActivationKind::Tanh => z.tanh(),
            // evaluated on |z| so the result is exactly odd
            ActivationKind::BipolarSigmoid => {
                let y = 2.0 / (1.0 + (-z.abs()).exp()) - 1.0;
                y.copysign(z)
            }
            ActivationKind::HardLimit => {
                if z > 0.0 {
                    1.0
                } else if z < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            ActivationKind::SaturatingLinear => z.clamp(-1.0, 1.0),
        }
    }

    /// Continuously differentiable and strictly increasing.
    pub fn is_smooth(self) -> bool {
        matches!(self, ActivationKind::Tanh | ActivationKind::BipolarSigmoid)
    }
}

pub fn activation_eval(kind: ActivationKind, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("neuron potential is not finite: {z}")));
    }
    Ok(kind.apply(z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neuron {
    /// Dendrite weights in 1/m, one per cell node in connectivity order.
    pub input_weights: [f64; 4],
    pub activation: ActivationKind,
    /// Traction per unit activation, Pa.
    pub output_weight: f64,
}

#[inline]
pub fn neuron_potential(u_x: &[f64; 4], input_weights: &[f64; 4]) -> f64 {
    u_x.iter().zip(input_weights).map(|(u, w)| u * w).sum()
}

/// Nodal x-forces of one neuro-element, in N.
pub fn element_neuro_forces(neuron: &Neuron, u_x: &[f64; 4], area: f64) -> [f64; 4] {
    let z = neuron_potential(u_x, &neuron.input_weights);
    let total = neuron.activation.apply(z) * neuron.output_weight * area;
    [total / 4.0; 4]
}

/// Expands a design vector of length `d` onto `elements` output weights in
/// contiguous blocks of `elements / d`.
pub fn broadcast_design(x: &[f64], elements: usize) -> Result<Vec<f64>> {
    let d = x.len();
    if d == 0 || elements == 0 {
        return Err(Error::InvalidArgument(format!(
            "broadcast needs a non-empty design and mesh, got d = {d}, P = {elements}"
        )));
    }
    if elements % d != 0 {
        return Err(Error::Divisibility { dim: d, elements });
    }
    let k = elements / d;
    Ok(x.iter().flat_map(|&v| std::iter::repeat(v).take(k)).collect())
}

/// Per-block means of `w`; left inverse of [`broadcast_design`].
pub fn block_average(w: &[f64], d: usize) -> Result<Vec<f64>> {
    if d == 0 || w.len() % d != 0 {
        return Err(Error::Divisibility {
            dim: d,
            elements: w.len(),
        });
    }
    let k = w.len() / d;
    // shifted by the first entry so a constant block comes back bit-exact
    Ok(w.chunks(k)
        .map(|c| c[0] + c.iter().map(|v| v - c[0]).sum::<f64>() / k as f64)
        .collect())
}

/// Neuron parameters shared by every cell plus the per-cell output weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuroLayout {
    pub input_weights: [f64; 4],
    pub activation: ActivationKind,
    output_weights: Vec<f64>,
    design_dim: usize,
}

impl NeuroLayout {
    pub fn new(
        activation: ActivationKind,
        input_weights: [f64; 4],
        output_weights: Vec<f64>,
        design_dim: usize,
    ) -> Result<Self> {
        if input_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("input weights must be finite".into()));
        }
        if design_dim == 0 || output_weights.len() % design_dim != 0 {
            return Err(Error::Divisibility {
                dim: design_dim,
                elements: output_weights.len(),
            });
        }
        Ok(Self {
            input_weights,
            activation,
            output_weights,
            design_dim,
        })
    }

    /// Layout whose output weights are the broadcast of the design vector `x`.
    pub fn from_design(
        activation: ActivationKind,
        input_weights: [f64; 4],
        x: &[f64],
        elements: usize,
    ) -> Result<Self> {
        Self::new(activation, input_weights, broadcast_design(x, elements)?, x.len())
    }

    pub fn element_count(&self) -> usize {
        self.output_weights.len()
    }

    pub fn design_dim(&self) -> usize {
        self.design_dim
    }

    pub fn block_size(&self) -> usize {
        self.output_weights.len() / self.design_dim
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn neuron(&self, e: usize) -> Neuron {
        Neuron {
            input_weights: self.input_weights,
            activation: self.activation,
            output_weight: self.output_weights[e],
        }
    }
}

/// Global neuro force vector: x-DOFs receive the scattered element forces,
/// y-DOFs stay zero.
pub fn assemble_neuro_force_vector(mesh: &Mesh, layout: &NeuroLayout, u: &[f64]) -> Result<Vec<f64>> {
    let mut f = vec![0.0; mesh.ndof()];
    add_neuro_forces(mesh, layout, u, &mut f)?;
    Ok(f)
}

/// Adds the neuro forces for displacement `u` into `f`.
pub fn add_neuro_forces(mesh: &Mesh, layout: &NeuroLayout, u: &[f64], f: &mut [f64]) -> Result<()> {
    let ndof = mesh.ndof();
    if u.len() != ndof || f.len() != ndof {
        return Err(Error::Shape {
            expected: ndof,
            got: if u.len() != ndof { u.len() } else { f.len() },
        });
    }
    if layout.element_count() != mesh.element_count() {
        return Err(Error::Shape {
            expected: mesh.element_count(),
            got: layout.element_count(),
        });
    }
    let area = mesh.element_area();
    for (e, conn) in mesh.connectivity().iter().enumerate() {
        let u_x = conn.map(|n| u[2 * n]);
        let forces = element_neuro_forces(&layout.neuron(e), &u_x, area);
        for (node, force) in conn.iter().zip(forces) {
            f[2 * node] += force;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid_mesh;

    #[test]
    fn activation_values() {
        for kind in ActivationKind::ALL {
            assert_eq!(activation_eval(kind, 0.0).unwrap(), 0.0);
            assert!(activation_eval(kind, f64::NAN).is_err());
            assert!(activation_eval(kind, f64::INFINITY).is_err());
        }
        assert_eq!(ActivationKind::HardLimit.apply(-3.0), -1.0);
        assert_eq!(ActivationKind::HardLimit.apply(1e-300), 1.0);
        assert_eq!(ActivationKind::SaturatingLinear.apply(0.3), 0.3);
        assert_eq!(ActivationKind::SaturatingLinear.apply(-7.0), -1.0);
        assert!((ActivationKind::BipolarSigmoid.apply(800.0) - 1.0).abs() < 1e-15);
        assert!((ActivationKind::BipolarSigmoid.apply(-800.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn potential_examples() {
        assert_eq!(neuron_potential(&[0.0; 4], &[1000.0; 4]), 0.0);
        assert!((neuron_potential(&[1e-3; 4], &[1000.0; 4]) - 4.0).abs() < 1e-12);
        let z = neuron_potential(&[2e-3, 0.0, 0.0, 0.0], &[500.0, 7.0, -3.0, 11.0]);
        assert!((z - 1.0).abs() < 1e-15);
    }

    #[test]
    fn element_force_path() {
        let neuron = Neuron {
            input_weights: [1000.0; 4],
            activation: ActivationKind::HardLimit,
            output_weight: 450_000.0,
        };
        assert_eq!(element_neuro_forces(&neuron, &[0.0; 4], 0.0025), [0.0; 4]);
        let f = element_neuro_forces(&neuron, &[1e-3; 4], 0.0025);
        assert!(f.iter().all(|&v| (v - 281.25).abs() < 1e-9));
        assert!((f.iter().sum::<f64>() - 1125.0).abs() < 1e-9);

        let double = Neuron {
            output_weight: 900_000.0,
            activation: ActivationKind::Tanh,
            ..neuron
        };
        let single = Neuron {
            activation: ActivationKind::Tanh,
            ..neuron
        };
        let u = [3e-4, -1e-4, 2e-4, 5e-5];
        let (a, b) = (
            element_neuro_forces(&single, &u, 0.0025),
            element_neuro_forces(&double, &u, 0.0025),
        );
        for k in 0..4 {
            assert_eq!(b[k], 2.0 * a[k]);
        }
    }

    #[test]
    fn broadcast_examples() {
        let w = broadcast_design(&[450_000.0], 200).unwrap();
        assert_eq!(w.len(), 200);
        assert!(w.iter().all(|&v| v == 450_000.0));
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        assert_eq!(broadcast_design(&x, 6).unwrap(), x);
        assert_eq!(broadcast_design(&[1.0, 2.0], 4).unwrap(), [1.0, 1.0, 2.0, 2.0]);
        assert!(matches!(
            broadcast_design(&[1.0, 2.0, 3.0], 200),
            Err(Error::Divisibility { dim: 3, elements: 200 })
        ));
        assert!(broadcast_design(&[], 4).is_err());
    }

    #[test]
    fn layout_validation() {
        assert!(NeuroLayout::new(ActivationKind::Tanh, [1.0; 4], vec![1.0; 6], 4).is_err());
        assert!(NeuroLayout::new(ActivationKind::Tanh, [f64::NAN, 1.0, 1.0, 1.0], vec![1.0; 4], 2).is_err());
        let l = NeuroLayout::from_design(ActivationKind::Tanh, [1.0; 4], &[1.0, 2.0], 200).unwrap();
        assert_eq!(l.block_size(), 100);
        assert_eq!(l.neuron(99).output_weight, 1.0);
        assert_eq!(l.neuron(100).output_weight, 2.0);
    }

    #[test]
    fn zero_displacement_gives_zero_force() {
        let mesh = build_grid_mesh(3, 4, 0.05).unwrap();
        for kind in ActivationKind::ALL {
            let layout = NeuroLayout::from_design(kind, [1000.0; 4], &[450_000.0], 12).unwrap();
            let f = assemble_neuro_force_vector(&mesh, &layout, &vec![0.0; mesh.ndof()]).unwrap();
            assert!(f.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_element_placement() {
        let mesh = build_grid_mesh(1, 1, 0.05).unwrap();
        let layout = NeuroLayout::from_design(ActivationKind::Tanh, [1000.0; 4], &[450_000.0], 1).unwrap();
        let u = [1e-4, 7e-5, 2e-4, -3e-5, -1e-4, 4e-4, 3e-4, 0.0];
        let f = assemble_neuro_force_vector(&mesh, &layout, &u).unwrap();
        let u_x = mesh.connectivity()[0].map(|n| u[2 * n]);
        let fe = element_neuro_forces(&layout.neuron(0), &u_x, mesh.element_area());
        for (k, &node) in mesh.connectivity()[0].iter().enumerate() {
            assert_eq!(f[2 * node], fe[k]);
            assert_eq!(f[2 * node + 1], 0.0);
        }
    }

    #[test]
    fn shape_errors() {
        let mesh = build_grid_mesh(2, 1, 0.05).unwrap();
        let layout = NeuroLayout::from_design(ActivationKind::Tanh, [1.0; 4], &[1.0], 2).unwrap();
        assert!(assemble_neuro_force_vector(&mesh, &layout, &[0.0; 3]).is_err());
        let wrong = NeuroLayout::from_design(ActivationKind::Tanh, [1.0; 4], &[1.0], 3).unwrap();
        assert!(assemble_neuro_force_vector(&mesh, &wrong, &vec![0.0; mesh.ndof()]).is_err());
    }
}
