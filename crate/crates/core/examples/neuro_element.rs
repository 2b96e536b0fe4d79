//! Activation kinds, a single neuro-element and the design broadcast.

use neuroskin::neuro::{block_average, broadcast_design, element_neuro_forces, ActivationKind, Neuron};

fn main() -> neuroskin::Result<()> {
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "z", "tanh", "bipolar", "hardlim", "satlin");
    for z in [-2.0, -0.5, 0.0, 0.25, 1.0, 3.0] {
        let ys: Vec<String> = ActivationKind::ALL.iter().map(|k| format!("{:>10.6}", k.apply(z))).collect();
        println!("{z:>8} {}", ys.join(" "));
    }

    let neuron = Neuron {
        input_weights: [1000.0; 4],
        activation: ActivationKind::Tanh,
        output_weight: 450_000.0,
    };
    let u_x = [1e-4, 2e-4, 3e-4, 0.0];
    let f = element_neuro_forces(&neuron, &u_x, 0.05 * 0.05);
    println!("nodal x-forces for u_x = {u_x:?}: {f:?} N");

    let x = [430_000.0, 470_000.0, 510_000.0, 540_000.0];
    let w = broadcast_design(&x, 200)?;
    println!("design of 4 broadcast to {} elements, first block ends at w[49] = {}, w[50] = {}", w.len(), w[49], w[50]);
    println!("block average back: {:?}", block_average(&w, 4)?);
    Ok(())
}
