//! Q4 membrane stiffness, global assembly and the rigid-body check on the
//! shipped 10 × 20 plate.

use neuroskin::config::default_sim_config;
use neuroskin::fe::{assemble_global, q4_lumped_mass, q4_membrane_stiffness};
use neuroskin::mesh::build_grid_mesh;

fn main() -> neuroskin::Result<()> {
    let cfg = default_sim_config();
    let mat = &cfg.material;
    let a = cfg.mesh.elem_size;

    let ke = q4_membrane_stiffness(a, mat)?;
    println!("element stiffness (N/m), first row:");
    println!("  {:?}", ke.row(0).iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>());
    println!("element lumped mass per DOF: {:.6} kg", q4_lumped_mass(a, mat)?[0]);

    let mesh = build_grid_mesh(cfg.mesh.nx, cfg.mesh.ny, a)?;
    let sys = assemble_global(&mesh, mat)?;
    let k = sys.stiffness();
    println!(
        "{} nodes, {} elements, {} free DOFs, {} stored stiffness entries",
        mesh.node_count(),
        mesh.element_count(),
        sys.free_dofs().len(),
        k.nnz()
    );

    let translate_x: Vec<f64> = (0..mesh.ndof()).map(|d| if d % 2 == 0 { 1.0 } else { 0.0 }).collect();
    let residual = k.mul_vec(&translate_x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("|K · rigid x-translation|∞ / |K|∞ = {:.2e}", residual / k.norm_inf());

    let total: f64 = (0..mesh.node_count()).map(|n| sys.mass()[2 * n]).sum();
    println!("total mass {total:.6} kg (ρ t A = {:.6})", mat.density * mat.thickness * 0.5);
    Ok(())
}
