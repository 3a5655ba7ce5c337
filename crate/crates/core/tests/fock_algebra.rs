mod common;

use cotunnel::fock::{anticommutation_violations, enumerate_basis, FockState, Lead, Mode, ModeRegistry, Spin, StateVector};
use cotunnel::model::build_registry;
use num_complex::Complex64;

#[test]
fn anticommutation_exhaustive_on_ten_modes() {
    let registry = build_registry(&common::example()).unwrap();
    assert_eq!(registry.len(), 10);
    assert_eq!(anticommutation_violations(&registry).unwrap(), 0);
}

/// Same relations through the sparse state-vector API, on superpositions.
#[test]
fn anticommutation_on_superpositions() {
    let registry = build_registry(&common::example()).unwrap();
    let n = registry.len();
    let mut psi = StateVector::new();
    for bits in (0..1u64 << n).step_by(7) {
        psi.add(FockState(bits), Complex64::new(bits as f64 * 0.01, -(bits as f64).sqrt()));
    }
    for i in 0..n {
        for j in 0..n {
            let ab = psi.apply_creation(&registry, j).unwrap().apply_annihilation(&registry, i).unwrap();
            let ba = psi.apply_annihilation(&registry, i).unwrap().apply_creation(&registry, j).unwrap();
            let mut sum = ab.clone();
            for (s, a) in ba.iter() {
                sum.add(s, a);
            }
            if i == j {
                for (s, a) in psi.iter() {
                    sum.add(s, -a);
                }
            }
            assert!(sum.is_zero(1e-12), "{{a_{i}, a_{j}^dag}} failed");

            let cc = psi.apply_creation(&registry, j).unwrap().apply_creation(&registry, i).unwrap();
            let cc2 = psi.apply_creation(&registry, i).unwrap().apply_creation(&registry, j).unwrap();
            let mut sum = cc;
            for (s, a) in cc2.iter() {
                sum.add(s, a);
            }
            assert!(sum.is_zero(1e-12));
        }
    }
}

/// Creating modes in any order gives the parity of the sorting permutation.
#[test]
fn creation_sign_is_permutation_parity() {
    let registry = build_registry(&common::example()).unwrap();
    let orders: [&[usize]; 4] = [&[0, 1, 2], &[2, 1, 0], &[1, 0, 2, 5], &[9, 3, 7, 1]];
    for order in orders {
        let mut psi = StateVector::vacuum();
        for &i in order.iter().rev() {
            psi = psi.apply_creation(&registry, i).unwrap();
        }
        let mut inversions = 0;
        for a in 0..order.len() {
            for b in a + 1..order.len() {
                if order[a] > order[b] {
                    inversions += 1;
                }
            }
        }
        let (_, amp) = psi.iter().next().unwrap();
        let expected = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(amp, Complex64::new(expected, 0.0), "order {order:?}");
    }
}

#[test]
fn basis_partitions_fock_space() {
    let registry = build_registry(&common::example()).unwrap();
    let mut all: Vec<FockState> = (0..=10).flat_map(|n| enumerate_basis(&registry, n).unwrap()).collect();
    assert_eq!(enumerate_basis(&registry, 2).unwrap().len(), 45);
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 1024);
}

#[test]
fn registry_is_canonical_and_rejects_duplicates() {
    let a = Mode::new(Lead::R2, 0, Spin::Down, -4.0);
    let b = Mode::new(Lead::L, 1, Spin::Up, -3.5);
    let c = Mode::new(Lead::Dot, 0, Spin::Up, 0.0);
    let r1 = ModeRegistry::new(vec![a, b, c]).unwrap();
    let r2 = ModeRegistry::new(vec![c, a, b]).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(r1.mode(0).lead, Lead::L);
    assert_eq!(r1.mode(2).lead, Lead::Dot);
    assert!(ModeRegistry::new(vec![a, a]).is_err());
    assert!(registry_error_on_bad_index(&r1));
}

fn registry_error_on_bad_index(r: &ModeRegistry) -> bool {
    r.apply_creation(FockState::VACUUM, r.len()).is_err()
}
