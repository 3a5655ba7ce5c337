//! Fermionic Fock space over a small, fixed list of single-particle modes.
//!
//! Basis states are occupation bitstrings (bit `i` is the occupancy of mode
//! `i` in the registry). Operators carry the Jordan-Wigner sign: acting on
//! mode `i` picks up `(-1)^n`, where `n` counts occupied modes with a lower
//! index.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_MODES: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lead {
    L,
    R1,
    R2,
    Dot,
}

impl fmt::Display for Lead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Lead::L => "L",
            Lead::R1 => "R1",
            Lead::R2 => "R2",
            Lead::Dot => "DOT",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "up",
            Spin::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub lead: Lead,
    /// Momentum slot within the lead; always 0 for the dot.
    pub slot: u8,
    pub spin: Spin,
    pub energy: f64,
}

impl Mode {
    pub fn new(lead: Lead, slot: u8, spin: Spin, energy: f64) -> Self {
        Mode {
            lead,
            slot,
            spin,
            energy,
        }
    }

    fn key(&self) -> (Lead, u8, Spin) {
        (self.lead, self.slot, self.spin)
    }
}

/// Ordered list of modes. The order fixes every fermionic sign, so it is
/// canonicalised on construction (lead, then slot, then spin) and never
/// changes afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRegistry {
    modes: Vec<Mode>,
}

impl ModeRegistry {
    pub fn new(mut modes: Vec<Mode>) -> Result<Self> {
        if modes.len() > MAX_MODES {
            return Err(Error::Usage(format!(
                "registry holds {} modes, at most {MAX_MODES} supported",
                modes.len()
            )));
        }
        if let Some(m) = modes.iter().find(|m| !m.energy.is_finite()) {
            return Err(Error::Usage(format!(
                "mode ({}, {}, {}) has non-finite energy",
                m.lead, m.slot, m.spin
            )));
        }
        modes.sort_by_key(|m| m.key());
        if let Some(w) = modes.windows(2).find(|w| w[0].key() == w[1].key()) {
            return Err(Error::Usage(format!(
                "duplicate mode ({}, {}, {})",
                w[0].lead, w[0].slot, w[0].spin
            )));
        }
        Ok(ModeRegistry { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> &Mode {
        &self.modes[index]
    }

    pub fn index_of(&self, lead: Lead, slot: u8, spin: Spin) -> Option<usize> {
        self.modes
            .binary_search_by_key(&(lead, slot, spin), |m| m.key())
            .ok()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.modes.len() {
            Err(Error::Usage(format!(
                "mode index {index} out of range for {} modes",
                self.modes.len()
            )))
        } else {
            Ok(())
        }
    }

    /// `a†_index |state>`; `None` when the mode is already occupied.
    pub fn apply_creation(
        &self,
        state: FockState,
        index: usize,
    ) -> Result<Option<(FockState, i8)>> {
        self.check_index(index)?;
        if state.is_occupied(index) {
            return Ok(None);
        }
        Ok(Some((FockState(state.0 | (1 << index)), state.sign_below(index))))
    }

    /// `a_index |state>`; `None` when the mode is empty.
    pub fn apply_annihilation(
        &self,
        state: FockState,
        index: usize,
    ) -> Result<Option<(FockState, i8)>> {
        self.check_index(index)?;
        if !state.is_occupied(index) {
            return Ok(None);
        }
        Ok(Some((
            FockState(state.0 & !(1 << index)),
            state.sign_below(index),
        )))
    }

    /// Sum of single-particle energies over occupied modes.
    pub fn occupied_energy(&self, state: FockState) -> f64 {
        state.occupied().map(|i| self.modes[i].energy).sum()
    }

    pub fn describe(&self, state: FockState) -> String {
        let parts: Vec<String> = state
            .occupied()
            .map(|i| {
                let m = &self.modes[i];
                format!("{}{}{}", m.lead, m.slot, if m.spin == Spin::Up { "u" } else { "d" })
            })
            .collect();
        format!("|{}>", parts.join(","))
    }
}

/// Occupation bitstring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FockState(pub u64);

impl FockState {
    pub const VACUUM: FockState = FockState(0);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_occupied(self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }

    pub fn particle_count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn occupied(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }

    fn sign_below(self, index: usize) -> i8 {
        let mask = (1u64 << index) - 1;
        if (self.0 & mask).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// All basis states with exactly `n_particles` occupied modes, in ascending
/// bitstring order.
pub fn enumerate_basis(registry: &ModeRegistry, n_particles: usize) -> Result<Vec<FockState>> {
    let n = registry.len();
    if n_particles > n {
        return Err(Error::Usage(format!(
            "cannot place {n_particles} particles in {n} modes"
        )));
    }
    if n_particles == 0 {
        return Ok(vec![FockState::VACUUM]);
    }
    let limit = 1u64 << n;
    let mut out = Vec::new();
    // Gosper's hack: next larger integer with the same popcount.
    let mut v: u64 = (1u64 << n_particles) - 1;
    while v < limit {
        out.push(FockState(v));
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    Ok(out)
}

/// Checks `{a_i, a_j†} = δ_ij` and `{a_i, a_j} = {a_i†, a_j†} = 0` on every
/// basis state of the registry's full Fock space. Returns the number of
/// violated (state, i, j, relation) cases.
pub fn anticommutation_violations(registry: &ModeRegistry) -> Result<usize> {
    let n = registry.len();
    if n > 16 {
        return Err(Error::Usage(format!("exhaustive check over {n} modes is too large")));
    }
    type Op = fn(&ModeRegistry, FockState, usize) -> Result<Option<(FockState, i8)>>;
    let create: Op = |r, s, i| r.apply_creation(s, i);
    let annihilate: Op = |r, s, i| r.apply_annihilation(s, i);
    // x y |s> as (state, sign)
    let product = |x: Op, i: usize, y: Op, j: usize, s: FockState| -> Result<Option<(FockState, i32)>> {
        Ok(match y(registry, s, j)? {
            Some((m, s1)) => x(registry, m, i)?.map(|(t, s2)| (t, i32::from(s1 * s2))),
            None => None,
        })
    };
    let mut violations = 0;
    for bits in 0..1u64 << n {
        let s = FockState(bits);
        for i in 0..n {
            for j in 0..n {
                for (x, y, expected) in [
                    (annihilate, create, i32::from(i == j)),
                    (annihilate, annihilate, 0),
                    (create, create, 0),
                ] {
                    let mut terms: BTreeMap<FockState, i32> = BTreeMap::new();
                    for term in [product(x, i, y, j, s)?, product(y, j, x, i, s)?].into_iter().flatten() {
                        *terms.entry(term.0).or_default() += term.1;
                    }
                    let ok = terms.iter().all(|(&t, &c)| c == if t == s { expected } else { 0 })
                        && (expected == 0 || terms.get(&s) == Some(&expected));
                    if !ok {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok(violations)
}

/// Sparse state vector keyed by basis state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVector {
    amplitudes: BTreeMap<FockState, Complex64>,
}

impl StateVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(state: FockState, amplitude: Complex64) -> Self {
        let mut v = Self::new();
        v.add(state, amplitude);
        v
    }

    pub fn vacuum() -> Self {
        Self::basis(FockState::VACUUM, Complex64::new(1.0, 0.0))
    }

    pub fn add(&mut self, state: FockState, amplitude: Complex64) {
        *self.amplitudes.entry(state).or_default() += amplitude;
    }

    pub fn get(&self, state: FockState) -> Complex64 {
        self.amplitudes.get(&state).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FockState, Complex64)> + '_ {
        self.amplitudes.iter().map(|(s, a)| (*s, *a))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// True when every amplitude has magnitude at most `tol`.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.amplitudes.values().all(|a| a.norm() <= tol)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        StateVector {
            amplitudes: self.amplitudes.iter().map(|(s, a)| (*s, a * factor)).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    /// Keeps only basis states that satisfy `keep`.
    pub fn restrict<F: Fn(FockState) -> bool>(&self, keep: F) -> Self {
        StateVector {
            amplitudes: self
                .amplitudes
                .iter()
                .filter(|(s, _)| keep(**s))
                .map(|(s, a)| (*s, *a))
                .collect(),
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .map(|(s, a)| a.conj() * other.get(*s))
            .sum()
    }

    pub fn apply_creation(&self, registry: &ModeRegistry, index: usize) -> Result<Self> {
        self.apply_with(|s| registry.apply_creation(s, index))
    }

    pub fn apply_annihilation(&self, registry: &ModeRegistry, index: usize) -> Result<Self> {
        self.apply_with(|s| registry.apply_annihilation(s, index))
    }

    fn apply_with<F>(&self, op: F) -> Result<Self>
    where
        F: Fn(FockState) -> Result<Option<(FockState, i8)>>,
    {
        let mut out = StateVector::new();
        for (s, a) in &self.amplitudes {
            if let Some((t, sign)) = op(*s)? {
                out.add(t, a * f64::from(sign));
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self, basis: &[FockState]) -> Result<Vec<Complex64>> {
        let mut dense = vec![Complex64::default(); basis.len()];
        for (s, a) in &self.amplitudes {
            if a.norm() == 0.0 {
                continue;
            }
            match basis.binary_search(s) {
                Ok(i) => dense[i] = *a,
                Err(_) => {
                    return Err(Error::Usage(format!(
                        "state {:#b} is not in the supplied basis",
                        s.0
                    )))
                }
            }
        }
        Ok(dense)
    }

    pub fn from_dense(basis: &[FockState], amplitudes: &[Complex64]) -> Self {
        StateVector {
            amplitudes: basis.iter().copied().zip(amplitudes.iter().copied()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry(n: usize) -> ModeRegistry {
        let modes = (0..n)
            .map(|i| Mode::new(Lead::L, (i / 2) as u8, if i % 2 == 0 { Spin::Up } else { Spin::Down }, i as f64))
            .collect();
        ModeRegistry::new(modes).unwrap()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn basis_sectors() {
        let r = registry(4);
        assert_eq!(enumerate_basis(&r, 0).unwrap(), vec![FockState(0)]);
        assert_eq!(enumerate_basis(&r, 4).unwrap(), vec![FockState(0b1111)]);
        // brute force over all bitstrings
        let brute: Vec<FockState> = (0u64..16)
            .filter(|b| b.count_ones() == 2)
            .map(FockState)
            .collect();
        let got = enumerate_basis(&r, 2).unwrap();
        assert_eq!(got.len(), 6);
        assert_eq!(got, brute);
        assert!(enumerate_basis(&r, 5).is_err());
    }

    #[test]
    fn sectors_partition_full_space() {
        let r = registry(10);
        let mut all: Vec<u64> = (0..=10)
            .flat_map(|n| enumerate_basis(&r, n).unwrap())
            .map(|s| s.0)
            .collect();
        for n in 0..=10u64 {
            assert_eq!(enumerate_basis(&r, n as usize).unwrap().len() as u64, binomial(10, n));
        }
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 1 << 10);
    }

    #[test]
    fn creation_and_annihilation_basics() {
        let r = registry(4);
        assert_eq!(
            r.apply_creation(FockState(0), 2).unwrap(),
            Some((FockState(0b0100), 1))
        );
        assert_eq!(r.apply_creation(FockState(0b0100), 2).unwrap(), None);
        assert_eq!(r.apply_creation(FockState(0b0011), 2).unwrap(), Some((FockState(0b0111), 1)));
        assert_eq!(r.apply_creation(FockState(0b0001), 2).unwrap(), Some((FockState(0b0101), -1)));
        assert_eq!(r.apply_annihilation(FockState(0), 1).unwrap(), None);
        let (s, sign1) = r.apply_creation(FockState(0), 3).unwrap().unwrap();
        assert_eq!(r.apply_annihilation(s, 3).unwrap(), Some((FockState(0), sign1)));
        assert!(matches!(r.apply_creation(FockState(0), 4), Err(Error::Usage(_))));
        assert!(matches!(r.apply_annihilation(FockState(0), 9), Err(Error::Usage(_))));
    }

    /// Independent sign oracle: write the state as an ordered product of
    /// creators on the vacuum, insert the new creator at the front and count
    /// the transpositions needed to sort it back into ascending order.
    fn creation_sign_by_permutation(occupied: &[usize], index: usize) -> Option<i8> {
        if occupied.contains(&index) {
            return None;
        }
        let mut word: Vec<usize> = std::iter::once(index).chain(occupied.iter().copied()).collect();
        let mut swaps = 0;
        for i in 0..word.len() {
            for j in 0..word.len() - 1 - i {
                if word[j] > word[j + 1] {
                    word.swap(j, j + 1);
                    swaps += 1;
                }
            }
        }
        Some(if swaps % 2 == 0 { 1 } else { -1 })
    }

    #[test]
    fn creation_sign_matches_permutation_oracle() {
        let r = registry(6);
        for bits in 0u64..64 {
            let s = FockState(bits);
            let occ: Vec<usize> = s.occupied().collect();
            for i in 0..6 {
                let got = r.apply_creation(s, i).unwrap().map(|(_, sg)| sg);
                assert_eq!(got, creation_sign_by_permutation(&occ, i), "bits {bits:b} i {i}");
            }
        }
    }

    #[test]
    fn registry_is_canonicalised_and_rejects_duplicates() {
        let r = ModeRegistry::new(vec![
            Mode::new(Lead::Dot, 0, Spin::Down, 0.0),
            Mode::new(Lead::R1, 0, Spin::Up, 1.0),
            Mode::new(Lead::L, 1, Spin::Up, -1.0),
            Mode::new(Lead::L, 0, Spin::Down, -2.0),
        ])
        .unwrap();
        let keys: Vec<_> = r.modes().iter().map(|m| (m.lead, m.slot, m.spin)).collect();
        assert_eq!(
            keys,
            vec![
                (Lead::L, 0, Spin::Down),
                (Lead::L, 1, Spin::Up),
                (Lead::R1, 0, Spin::Up),
                (Lead::Dot, 0, Spin::Down)
            ]
        );
        assert_eq!(r.index_of(Lead::R1, 0, Spin::Up), Some(2));
        assert_eq!(r.index_of(Lead::R2, 0, Spin::Up), None);
        let dup = ModeRegistry::new(vec![
            Mode::new(Lead::L, 0, Spin::Up, 0.0),
            Mode::new(Lead::L, 0, Spin::Up, 1.0),
        ]);
        assert!(dup.is_err());
        assert!(ModeRegistry::new(vec![Mode::new(Lead::L, 0, Spin::Up, f64::NAN)]).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let r = registry(4);
        let basis = enumerate_basis(&r, 2).unwrap();
        let mut v = StateVector::new();
        v.add(FockState(0b0101), Complex64::new(0.5, -0.25));
        v.add(FockState(0b1100), Complex64::new(-1.0, 0.0));
        let dense = v.to_dense(&basis).unwrap();
        assert_eq!(StateVector::from_dense(&basis, &dense).restrict(|s| v.get(s).norm() > 0.0), v);
        let outside = StateVector::basis(FockState(0b0001), Complex64::new(1.0, 0.0));
        assert!(outside.to_dense(&basis).is_err());
    }
}
