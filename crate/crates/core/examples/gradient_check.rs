//! Forward-difference gradient of the RMSE objective against a central
//! difference with a ten times smaller step, on the four-block design.

use neuroskin::config::default_run_config;
use neuroskin::objective::{rmse, TrainingProblem};
use neuroskin::simulation::Simulator;

fn main() -> neuroskin::Result<()> {
    let mut cfg = default_run_config();
    cfg.sim.neuron.design_dim = 4;
    let sim = Simulator::new(&cfg.sim)?;
    let target = sim.run_design(&[430_000.0, 470_000.0, 510_000.0, 540_000.0])?.values;
    let p = TrainingProblem::from_config(&cfg, target)?;
    let h = p.fd_delta() / 10.0;

    for xi in [[0.5; 4], [0.1, 0.9, 0.3, 0.6]] {
        let e = p.objective_and_gradient(&xi)?;
        println!("x = {:?}, rmse = {:.6e} ({} simulations)", p.to_physical(&xi), e.f, e.n_sims);
        for i in 0..4 {
            let (mut xp, mut xm) = (xi, xi);
            xp[i] += h;
            xm[i] -= h;
            let fp = rmse(&sim.run_design(&p.to_physical(&xp))?.values, p.target())?;
            let fm = rmse(&sim.run_design(&p.to_physical(&xm))?.values, p.target())?;
            let central = (fp - fm) / (2.0 * h);
            println!("  g[{i}] forward {:+.6e}  central {central:+.6e}  ratio {:.4}", e.g[i], e.g[i] / central);
        }
    }
    Ok(())
}
