//! Finite-element and time-stepping checks against independently coded
//! dense references.

mod common;

use common::square_stiffness_oracle;
use nalgebra::{DMatrix, DVector};
use neuroskin::config::default_sim_config;
use neuroskin::fe::{assemble_global, mechanical_energy, quad4_stiffness, DynState, Material, Newmark, NewmarkParams};
use neuroskin::mesh::build_grid_mesh;
use neuroskin::simulation::{excitation_force, simulate, MeshParams, SimConfig, Simulator};

fn material(e: f64, nu: f64, t: f64) -> Material {
    Material {
        youngs_modulus: e,
        poisson_ratio: nu,
        density: 1200.0,
        thickness: t,
        rayleigh_a0: 0.0,
        rayleigh_a1: 0.0,
    }
}

#[test]
fn element_matches_direct_quadrature() {
    for (a, e, nu, t) in [(1.0, 1.0, 0.25, 1.0), (0.05, 2e9, 0.3, 0.005), (2.5, 7e10, 0.0, 0.1)] {
        let oracle = square_stiffness_oracle(a, e, nu, t);
        let k = quad4_stiffness(&[[0.0, 0.0], [a, 0.0], [a, a], [0.0, a]], &material(e, nu, t)).unwrap();
        let scale = oracle.amax();
        for i in 0..8 {
            for j in 0..8 {
                assert!(
                    (k[(i, j)] - oracle[(i, j)]).abs() <= 1e-12 * scale,
                    "a={a} ({i},{j}): {} vs {}",
                    k[(i, j)],
                    oracle[(i, j)]
                );
            }
        }
    }
}

#[test]
fn global_stiffness_nullspace_and_mass() {
    let cfg = default_sim_config();
    let mesh = build_grid_mesh(10, 20, 0.05).unwrap();
    let sys = assemble_global(&mesh, &cfg.material).unwrap();
    let k = sys.stiffness();
    let tol = 1e-9 * k.norm_inf();
    let n = mesh.node_count();
    let mut rigid = vec![vec![0.0; 2 * n]; 3];
    for (i, p) in mesh.node_coords().iter().enumerate() {
        rigid[0][2 * i] = 1.0;
        rigid[1][2 * i + 1] = 1.0;
        rigid[2][2 * i] = -p[1];
        rigid[2][2 * i + 1] = p[0];
    }
    for r in &rigid {
        assert!(k.mul_vec(r).iter().all(|v| v.abs() <= tol));
    }
    assert_eq!(k, &k.transpose());
    let m = &cfg.material;
    let ux_mass: f64 = (0..n).map(|i| sys.mass()[2 * i]).sum();
    assert!((ux_mass - m.density * m.thickness * 0.5).abs() <= 1e-14 * ux_mass);
}

/// Dense model of the 2×4 plate with the neurons switched off.
struct DenseModel {
    k: DMatrix<f64>,
    m: DVector<f64>,
    c: DMatrix<f64>,
    free: Vec<usize>,
}

fn dense_model(cfg: &SimConfig) -> DenseModel {
    let MeshParams { nx, ny, elem_size: a } = cfg.mesh;
    let mat = &cfg.material;
    let ke = square_stiffness_oracle(a, mat.youngs_modulus, mat.poisson_ratio, mat.thickness);
    let nn = (nx + 1) * (ny + 1);
    let mut k = DMatrix::zeros(2 * nn, 2 * nn);
    let mut m = DVector::zeros(2 * nn);
    for j in 0..ny {
        for i in 0..nx {
            let n0 = j * (nx + 1) + i;
            let nodes = [n0, n0 + 1, n0 + nx + 2, n0 + nx + 1];
            for (p, &np) in nodes.iter().enumerate() {
                for q in 0..4 {
                    for (dp, dq) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        k[(2 * np + dp, 2 * nodes[q] + dq)] += ke[(2 * p + dp, 2 * q + dq)];
                    }
                }
                let quarter = mat.density * mat.thickness * a * a / 4.0;
                m[2 * np] += quarter;
                m[2 * np + 1] += quarter;
            }
        }
    }
    let c = DMatrix::from_diagonal(&m) * mat.rayleigh_a0 + &k * mat.rayleigh_a1;
    let free = (2 * (nx + 1)..2 * nn).collect();
    DenseModel { k, m, c, free }
}

fn small_config() -> SimConfig {
    let mut c = default_sim_config();
    c.mesh = MeshParams {
        nx: 2,
        ny: 4,
        elem_size: 0.05,
    };
    c.excitation.nodes = vec![13];
    c.output.node = 13;
    c.time.n_steps = 300;
    c.neuron.design_dim = 1;
    c
}

#[test]
fn linear_response_matches_dense_newmark() {
    let cfg = small_config();
    let model = dense_model(&cfg);
    let free = &model.free;
    let nf = free.len();
    let sub = |a: &DMatrix<f64>| DMatrix::from_fn(nf, nf, |i, j| a[(free[i], free[j])]);
    let (k, c) = (sub(&model.k), sub(&model.c));
    let m = DMatrix::from_diagonal(&DVector::from_fn(nf, |i, _| model.m[free[i]]));
    let dt = cfg.time.dt;
    let (b, g) = (0.25, 0.5);
    let keff = &k + &c * (g / (b * dt)) + &m * (1.0 / (b * dt * dt));
    let lu = keff.lu();

    let load = |t: f64| {
        let mut f = DVector::zeros(nf);
        for &n in &cfg.excitation.nodes {
            let dof = 2 * n;
            let i = free.iter().position(|&d| d == dof).unwrap();
            f[i] += excitation_force(&cfg.excitation, t);
        }
        f
    };
    let mut u = DVector::zeros(nf);
    let mut v = DVector::zeros(nf);
    let mut acc = m.clone().lu().solve(&load(0.0)).unwrap();
    let out = free.iter().position(|&d| d == 2 * cfg.output.node).unwrap();
    let mut expected = Vec::new();
    for step in 1..=cfg.time.n_steps {
        let rhs = load(step as f64 * dt)
            + &m * (&u / (b * dt * dt) + &v / (b * dt) + &acc * (0.5 / b - 1.0))
            + &c * (&u * (g / (b * dt)) + &v * (g / b - 1.0) + &acc * (dt * (g / (2.0 * b) - 1.0)));
        let u1 = lu.solve(&rhs).unwrap();
        let a1 = (&u1 - &u) / (b * dt * dt) - &v / (b * dt) - &acc * (0.5 / b - 1.0);
        v += (&acc * (1.0 - g) + &a1 * g) * dt;
        u = u1;
        acc = a1;
        expected.push(u[out]);
    }

    let got = simulate(&cfg, &[0.0; 8]).unwrap();
    let scale = expected.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    assert!(scale > 0.0);
    for (i, (a, b)) in got.values.iter().zip(&expected).enumerate() {
        assert!((a - b).abs() <= 1e-9 * scale, "step {}: {a} vs {b}", i + 1);
    }
}

#[test]
fn undamped_free_vibration_conserves_energy() {
    let mut cfg = small_config();
    cfg.material.rayleigh_a0 = 0.0;
    cfg.material.rayleigh_a1 = 0.0;
    let mesh = build_grid_mesh(2, 4, 0.05).unwrap();
    let sys = assemble_global(&mesh, &cfg.material).unwrap();
    let n = sys.ndof();
    let nm = Newmark::new(sys, 1e-4, NewmarkParams::default()).unwrap();
    let u0: Vec<f64> = (0..n).map(|i| 1e-4 * ((i * 7 % 11) as f64 - 5.0)).collect();
    let v0: Vec<f64> = (0..n).map(|i| 1e-2 * ((i * 3 % 5) as f64 - 2.0)).collect();
    let zero = vec![0.0; n];
    let mut s: DynState = nm.initial_state(0.0, &u0, &v0, &zero).unwrap();
    let e0 = mechanical_energy(nm.system(), &s);
    assert!(e0 > 0.0);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        s = nm.step(&s, &zero).unwrap();
        worst = worst.max((mechanical_energy(nm.system(), &s) - e0).abs() / e0);
    }
    assert!(worst <= 1e-8, "relative drift {worst:e}");
}

#[test]
fn linear_superposition_and_sign_symmetry() {
    let cfg = small_config();
    let zero_w = [0.0; 8];
    let run = |amp: f64, nodes: &[usize]| {
        let mut c = cfg.clone();
        c.excitation.amplitude = amp;
        c.excitation.nodes = nodes.to_vec();
        simulate(&c, &zero_w).unwrap().values
    };
    let a = run(30.0, &[13]);
    let b = run(-12.0, &[13]);
    let ab = run(18.0, &[13]);
    let scale = ab.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for i in 0..a.len() {
        assert!((a[i] + b[i] - ab[i]).abs() <= 1e-10 * scale);
    }

    // with neurons active, an odd activation keeps the response odd
    let mut c = cfg.clone();
    let w = [450_000.0; 8];
    let pos = simulate(&c, &w).unwrap().values;
    c.excitation.amplitude = -c.excitation.amplitude;
    let neg = simulate(&c, &w).unwrap().values;
    for (p, n) in pos.iter().zip(&neg) {
        assert_eq!(*p, -*n);
    }
}

#[test]
fn design_continuity_and_long_run_boundedness() {
    let mut cfg = small_config();
    let sim = Simulator::new(&cfg).unwrap();
    let base = sim.run_design(&[480_000.0]).unwrap().values;
    let mut last = f64::INFINITY;
    for delta in [1e-2, 1e-3, 1e-4] {
        let moved = sim.run_design(&[480_000.0 + delta * 150_000.0]).unwrap().values;
        let diff = base.iter().zip(&moved).fold(0.0f64, |s, (a, b)| s.max((a - b).abs()));
        assert!(diff < last, "delta {delta}: {diff} !< {last}");
        last = diff;
    }

    cfg.time.n_steps = 10_000;
    let y = simulate(&cfg, &[550_000.0; 8]).unwrap().values;
    assert!(y.iter().all(|v| v.is_finite()));
}
