//! Average-acceleration Newmark on a unit-mass oscillator, compared with the
//! closed-form cosine.

use std::f64::consts::PI;

use neuroskin::fe::sparse::CsrMatrix;
use neuroskin::fe::{mechanical_energy, GlobalSystem, Newmark, NewmarkParams};

fn main() -> neuroskin::Result<()> {
    // DOF 0 is pinned, DOF 1 carries k = (2π)², m = 1, so T = 1 s
    let k = CsrMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, 4.0 * PI * PI)]);
    let sys = GlobalSystem::from_parts(k, vec![1.0, 1.0], 0.0, 0.0, [0].into())?;

    for steps_per_period in [10, 100, 1000] {
        let dt = 1.0 / steps_per_period as f64;
        let nm = Newmark::new(sys.clone(), dt, NewmarkParams::default())?;
        let mut s = nm.initial_state(0.0, &[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0])?;
        let e0 = mechanical_energy(nm.system(), &s);
        for _ in 0..steps_per_period {
            s = nm.step(&s, &[0.0, 0.0])?;
        }
        println!(
            "dt = T/{steps_per_period:<5} u(T) = {:.10}  error {:.2e}  energy change {:.1e}",
            s.u[1],
            (s.u[1] - 1.0).abs(),
            (mechanical_energy(nm.system(), &s) - e0) / e0
        );
    }
    Ok(())
}
