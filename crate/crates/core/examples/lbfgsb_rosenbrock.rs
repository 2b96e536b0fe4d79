//! Bound-constrained minimization of the Rosenbrock function, once with the
//! minimizer inside the box and once with it cut off.

use neuroskin::lbfgsb::{minimize, Bounds, LbfgsbOptions};

fn rosenbrock(x: &[f64]) -> neuroskin::Result<(f64, Vec<f64>)> {
    let (a, b) = (x[0], x[1]);
    Ok((
        100.0 * (b - a * a).powi(2) + (1.0 - a).powi(2),
        vec![-400.0 * a * (b - a * a) - 2.0 * (1.0 - a), 200.0 * (b - a * a)],
    ))
}

fn main() -> neuroskin::Result<()> {
    let opts = LbfgsbOptions {
        factr: 10.0,
        pgtol: 1e-10,
        maxiter: 200,
        maxfun: 1000,
        ..Default::default()
    };
    for bounds in [Bounds::uniform(2, -2.0, 2.0)?, Bounds::new(vec![-2.0, -2.0], vec![0.5, 2.0])?] {
        let r = minimize(rosenbrock, &[-1.2, 1.0], &bounds, &opts, |_| Ok(()))?;
        println!(
            "box x ≤ {}: x = [{:.8}, {:.8}], f = {:.3e}, {} iterations, {} evaluations, {}",
            bounds.upper()[0],
            r.x[0],
            r.x[1],
            r.f,
            r.iterations,
            r.n_evaluations,
            r.status
        );
        for rec in r.trace.iter().step_by(8) {
            println!("  {:>3}  f = {:.6e}  |pg| = {:.2e}", rec.iteration, rec.f, rec.pg_norm);
        }
    }
    Ok(())
}
