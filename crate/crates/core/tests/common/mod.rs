//! Helpers shared by the integration tests, including an independent
//! fourth-order reference built from dense matrices rather than from
//! vertex orderings.
#![allow(dead_code)]

use cotunnel::fock::{Lead, ModeRegistry, Spin, StateVector};
use cotunnel::model::{build_hamiltonian, build_initial_state, build_registry, EnergyConfig, SpinPair, SLOT_K};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn example() -> EnergyConfig {
    EnergyConfig::new(-3.0, 0.5, 1.0, 2.0)
}

/// `count` valid random configurations, reproducible from `seed`.
pub fn random_configs(seed: u64, count: usize) -> Vec<EnergyConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| EnergyConfig::sample(&mut rng)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `a†_{R1 s1} a†_{R2 s2} |0>`.
pub fn output_ket(registry: &ModeRegistry, s1: Spin, s2: Spin) -> StateVector {
    let r1 = registry.index_of(Lead::R1, SLOT_K, s1).unwrap();
    let r2 = registry.index_of(Lead::R2, SLOT_K, s2).unwrap();
    StateVector::vacuum()
        .apply_creation(registry, r2)
        .unwrap()
        .apply_creation(registry, r1)
        .unwrap()
}

/// Reference output from `<f| V G V G V G V |i>` with
/// `G = Q / (E_0 - H_0)`, `Q` removing every state degenerate with the
/// input. Returned C-stripped as (singlet, triplet_m0, triplet_up) using
/// the unnormalised `|S>, |T0> = |ud> -/+ |du>`.
pub fn resolvent_reference(config: &EnergyConfig, spins: SpinPair) -> (f64, f64, f64) {
    let registry = build_registry(config).unwrap();
    let h = build_hamiltonian(config, &registry, 2).unwrap();
    let n = h.dimension();
    let h0 = DMatrix::from_diagonal(&h.matrix.diagonal());
    let v = &h.matrix - &h0;
    let psi0 = build_initial_state(config, &registry, spins).unwrap();
    let x: DVector<f64> = DVector::from_iterator(n, psi0.to_dense(&h.basis).unwrap().iter().map(|z| z.re));
    let e0 = (0..n)
        .filter(|&i| x[i] != 0.0)
        .map(|i| h0[(i, i)])
        .next()
        .unwrap();
    let g = DMatrix::from_fn(n, n, |i, j| {
        let d = e0 - h0[(i, i)];
        if i == j && d.abs() > 1e-9 {
            1.0 / d
        } else {
            0.0
        }
    });
    let y = &v * &g * &v * &g * &v * &g * &v * x;
    let project = |ket: StateVector| -> f64 {
        let k: Vec<f64> = ket.to_dense(&h.basis).unwrap().iter().map(|z| z.re).collect();
        k.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>() / config.coupling_product()
    };
    let ud = project(output_ket(&registry, Spin::Up, Spin::Down));
    let du = project(output_ket(&registry, Spin::Down, Spin::Up));
    let uu = project(output_ket(&registry, Spin::Up, Spin::Up));
    ((ud - du) / 2.0, (ud + du) / 2.0, uu)
}

/// Total singlet coefficient written out by hand: 2 E U / ((E^2-dR^2)(E^2-dL^2)(2E-U)).
pub fn hand_total_singlet(e: f64, dl: f64, dr: f64, u: f64) -> f64 {
    2.0 * e * u / ((e * e - dr * dr) * (e * e - dl * dl) * (2.0 * e - u))
}
