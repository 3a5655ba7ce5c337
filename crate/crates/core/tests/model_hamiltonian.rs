mod common;

use cotunnel::fock::{enumerate_basis, Lead, Spin};
use cotunnel::model::{
    build_full_hamiltonian, build_hamiltonian, build_registry, hamiltonian_on_basis, lead_energies, validate_config,
    EnergyConfig, Violation,
};
use nalgebra::SymmetricEigen;

#[test]
fn hermitian_and_number_conserving_for_random_configs() {
    for cfg in common::random_configs(11, 20) {
        let registry = build_registry(&cfg).unwrap();
        let full = build_full_hamiltonian(&cfg, &registry).unwrap();
        assert_eq!(full.dimension(), 1024);
        assert_eq!(full.hermiticity_defect(), 0.0);
        assert_eq!(full.number_mixing(), 0.0);
        let sector = build_hamiltonian(&cfg, &registry, 2).unwrap();
        assert_eq!(sector.hermiticity_defect(), 0.0);
        // the sector block is exactly the restriction of the full matrix
        for (i, &si) in sector.basis.iter().enumerate() {
            for (j, &sj) in sector.basis.iter().enumerate() {
                let fi = full.index_of(si).unwrap();
                let fj = full.index_of(sj).unwrap();
                assert_eq!(sector.matrix[(i, j)], full.matrix[(fi, fj)]);
            }
        }
    }
}

#[test]
fn decoupled_spectrum_is_pair_sums() {
    let mut cfg = common::example();
    cfg.v_l = 0.0;
    cfg.v_r1 = 0.0;
    cfg.v_r2 = 0.0;
    let registry = build_registry(&common::example()).unwrap();
    let h = hamiltonian_on_basis(&cfg, &registry, enumerate_basis(&registry, 2).unwrap()).unwrap();
    let mut got: Vec<f64> = SymmetricEigen::new(h.matrix.clone()).eigenvalues.iter().copied().collect();
    let energies: Vec<f64> = registry.modes().iter().map(|m| m.energy).collect();
    let mut want = Vec::new();
    for i in 0..energies.len() {
        for j in i + 1..energies.len() {
            let both_dot = registry.mode(i).lead == Lead::Dot && registry.mode(j).lead == Lead::Dot;
            want.push(energies[i] + energies[j] + if both_dot { cfg.u } else { 0.0 });
        }
    }
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    assert_eq!(got.len(), 45);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-14, "{g} vs {w}");
    }
}

#[test]
fn lead_energies_example_and_round_trip() {
    let e = lead_energies(&common::example()).unwrap();
    assert_eq!((e.l_k, e.l_k_prime, e.r1, e.r2), (-2.5, -3.5, -2.0, -4.0));
    for cfg in common::random_configs(3, 200) {
        let e = lead_energies(&cfg).unwrap();
        // equal up to rounding of the two sums
        assert!((e.l_k + e.l_k_prime - (e.r1 + e.r2)).abs() <= 4.0 * f64::EPSILON * cfg.e_l.abs());
        let (el, dl, dr) = e.parameters();
        assert!((el - cfg.e_l).abs() <= 4.0 * f64::EPSILON * cfg.e_l.abs());
        assert!((dl - cfg.delta_l).abs() <= 8.0 * f64::EPSILON * cfg.e_l.abs());
        assert!((dr - cfg.delta_r).abs() <= 8.0 * f64::EPSILON * cfg.e_l.abs());
    }
    let sym = lead_energies(&EnergyConfig::new(-3.0, 0.0, 1.0, 2.0)).unwrap();
    assert_eq!((sym.l_k, sym.l_k_prime, sym.r1, sym.r2), (-3.0, -3.0, -2.0, -4.0));
}

#[test]
fn validation_examples() {
    assert!(validate_config(&common::example()).is_empty());
    let v = validate_config(&EnergyConfig::new(-3.0, 1.0, 1.0, 2.0));
    assert!(v.iter().any(|x| x.to_string().contains("Delta_L < Delta_R")));
    let v = validate_config(&EnergyConfig::new(1.0, 0.2, 0.5, 2.0));
    assert!(matches!(v.as_slice(), [Violation::Degenerate { factor: "2E_L-U", .. }]));
}

#[test]
fn doubly_occupied_dot_carries_u() {
    let cfg = common::example();
    let registry = build_registry(&cfg).unwrap();
    let h = build_hamiltonian(&cfg, &registry, 2).unwrap();
    let up = registry.index_of(Lead::Dot, 0, Spin::Up).unwrap();
    let dn = registry.index_of(Lead::Dot, 0, Spin::Down).unwrap();
    let i = h.index_of(cotunnel::FockState((1 << up) | (1 << dn))).unwrap();
    assert_eq!(h.matrix[(i, i)], 2.0 * cfg.eps_d + cfg.u);
}
