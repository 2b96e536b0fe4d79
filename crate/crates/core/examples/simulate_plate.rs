//! Forward simulation of the shipped plate for a few uniform output weights.
//!
//! `cargo run --release --example simulate_plate [out_dir]` also writes
//! `output.out` and `params.csv` for the first design.

use std::time::Instant;

use neuroskin::commands::{self, LoadedConfig, WeightSource};
use neuroskin::simulation::Simulator;

fn main() -> neuroskin::Result<()> {
    let loaded = LoadedConfig::builtin();
    let sim = Simulator::new(&loaded.config.sim)?;
    for w in [0.0, 400_000.0, 450_000.0, 500_000.0, 550_000.0] {
        let t = Instant::now();
        let y = sim.run_design(&[w])?;
        let peak = y.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!(
            "w_o = {w:>8}: {} samples, rms {:.6e} m, peak {:.6e} m, final {:+.6e} m ({:.1} ms)",
            y.len(),
            y.rms(),
            peak,
            y.values[y.len() - 1],
            t.elapsed().as_secs_f64() * 1e3
        );
    }
    if let Some(dir) = std::env::args().nth(1) {
        let info = commands::simulate(&loaded, &WeightSource::Design(vec![400_000.0]), dir.as_ref())?;
        println!("wrote {} samples to {dir}", info.n);
    }
    Ok(())
}
