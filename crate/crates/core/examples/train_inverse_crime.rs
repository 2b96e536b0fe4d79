//! Generates a target from a known design and trains back to it through the
//! same code paths as the command-line tool.
//!
//! `cargo run --release --example train_inverse_crime [d]` with `d` = 1 or 4.

use neuroskin::commands::{self, LoadedConfig};
use neuroskin::config::default_run_config;

fn main() -> neuroskin::Result<()> {
    let d: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let w_star = match d {
        1 => vec![500_000.0],
        4 => vec![430_000.0, 470_000.0, 510_000.0, 540_000.0],
        _ => panic!("d must be 1 or 4"),
    };
    let mut cfg = default_run_config();
    cfg.sim.neuron.design_dim = d;
    cfg.training.optimizer.maxiter = 50;
    let loaded = LoadedConfig::from_config(cfg)?;

    let dir = tempfile::tempdir().expect("temporary directory");
    let target = dir.path().join("target.out");
    let info = commands::gen_target(&loaded, &w_star, &target)?;
    println!("target: {} samples, rms {:.6e} m", info.n, info.rms);

    let out = commands::train(&loaded, &target, &dir.path().join("run"))?;
    for row in &out.rows {
        let x: Vec<String> = row.x.iter().map(|v| format!("{v:.1}")).collect();
        println!("{:>3}  [{}]  rmse {:.6e}", row.iter, x.join(", "), row.rmse.unwrap_or(f64::NAN));
    }
    let s = &out.summary;
    println!("{} after {} iterations, {} evaluations, {:.2} s", s.message, s.iterations, s.n_evaluations, s.wall_time_s);
    println!("target design {w_star:?}");
    Ok(())
}
