//! Plane-stress membrane finite elements and implicit structural dynamics.

mod element;
mod material;
mod newmark;
pub mod sparse;
mod system;

pub use element::{q4_lumped_mass, q4_membrane_stiffness, quad4_stiffness, ElementMatrix};
pub use material::Material;
pub use newmark::{mechanical_energy, newmark_step, DynState, Newmark, NewmarkParams};
pub use system::{assemble_global, GlobalSystem};
