//! Physical configuration of the three-port dot: energy parameterisation,
//! validity rules, the truncated Anderson Hamiltonian and the two-electron
//! input state.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, FockState, Lead, Mode, ModeRegistry, Spin, StateVector};

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;
pub const DEFAULT_COUPLING: f64 = 1e-2;

/// Energies are dimensionless with hbar = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    /// Mean energy of the two input electrons.
    pub e_l: f64,
    /// Half-splitting of the input pair.
    pub delta_l: f64,
    /// Half-splitting of the output pair.
    pub delta_r: f64,
    /// On-site charging energy.
    pub u: f64,
    pub eps_d: f64,
    pub v_l: f64,
    pub v_r1: f64,
    pub v_r2: f64,
    /// Relative tolerance for rejecting vanishing energy denominators.
    pub degeneracy_tol: f64,
}

impl EnergyConfig {
    pub fn new(e_l: f64, delta_l: f64, delta_r: f64, u: f64) -> Self {
        EnergyConfig {
            e_l,
            delta_l,
            delta_r,
            u,
            eps_d: 0.0,
            v_l: DEFAULT_COUPLING,
            v_r1: DEFAULT_COUPLING,
            v_r2: DEFAULT_COUPLING,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
        }
    }

    /// Same coupling on all three leads.
    pub fn with_coupling(mut self, v: f64) -> Self {
        self.v_l = v;
        self.v_r1 = v;
        self.v_r2 = v;
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn with_eps_d(mut self, eps_d: f64) -> Self {
        self.eps_d = eps_d;
        self
    }

    /// Mean input energy measured from the dot level.
    pub fn referenced_e_l(&self) -> f64 {
        self.e_l - self.eps_d
    }

    /// `V_L^2 V_R1 V_R2`, the coupling product of every fourth-order term.
    pub fn coupling_product(&self) -> f64 {
        self.v_l * self.v_l * self.v_r1 * self.v_r2
    }

    pub fn coupling(&self, lead: Lead) -> f64 {
        match lead {
            Lead::L => self.v_l,
            Lead::R1 => self.v_r1,
            Lead::R2 => self.v_r2,
            Lead::Dot => 0.0,
        }
    }

    pub fn energy_scale(&self) -> f64 {
        self.referenced_e_l()
            .abs()
            .max(self.delta_r)
            .max(self.u)
            .max(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let v = validate_config(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Draws a configuration from the regime used by the property tests:
    /// left lead below the dot, empty dot, all denominators well away from
    /// zero. Invalid draws are rejected and redrawn.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let delta_r = rng.gen_range(0.5..=2.0);
            let cfg = EnergyConfig::new(
                rng.gen_range(-6.0..=-1.0),
                rng.gen_range(0.0..=0.8 * delta_r),
                delta_r,
                rng.gen_range(0.1..=5.0),
            );
            if validate_config(&cfg).is_empty() {
                return cfg;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite(&'static str),
    Negative(&'static str),
    NonPositive(&'static str),
    /// Single-electron tunneling is only suppressed for `Delta_L < Delta_R`.
    SplittingOrder { delta_l: f64, delta_r: f64 },
    Degenerate { factor: &'static str, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite(k) => write!(f, "{k} is not finite"),
            Violation::Negative(k) => write!(f, "{k} must be >= 0"),
            Violation::NonPositive(k) => write!(f, "{k} must be > 0"),
            Violation::SplittingOrder { delta_l, delta_r } => write!(
                f,
                "Delta_L < Delta_R required to suppress single-electron tunneling \
                 (Delta_L={delta_l}, Delta_R={delta_r})"
            ),
            Violation::Degenerate { factor, value } => {
                write!(f, "pole: {factor} degenerate (value {value:e})")
            }
        }
    }
}

/// Every violated invariant of `config`; empty means valid.
pub fn validate_config(config: &EnergyConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let fields = [
        ("E_L", config.e_l),
        ("Delta_L", config.delta_l),
        ("Delta_R", config.delta_r),
        ("U", config.u),
        ("eps_d", config.eps_d),
        ("V_L", config.v_l),
        ("V_R1", config.v_r1),
        ("V_R2", config.v_r2),
        ("degeneracy_tol", config.degeneracy_tol),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            out.push(Violation::NonFinite(name));
        }
    }
    if !out.is_empty() {
        return out;
    }
    if config.delta_l < 0.0 {
        out.push(Violation::Negative("Delta_L"));
    }
    if config.u < 0.0 {
        out.push(Violation::Negative("U"));
    }
    for (name, value) in [
        ("Delta_R", config.delta_r),
        ("V_L", config.v_l),
        ("V_R1", config.v_r1),
        ("V_R2", config.v_r2),
        ("degeneracy_tol", config.degeneracy_tol),
    ] {
        if value <= 0.0 {
            out.push(Violation::NonPositive(name));
        }
    }
    if config.delta_l >= config.delta_r {
        out.push(Violation::SplittingOrder {
            delta_l: config.delta_l,
            delta_r: config.delta_r,
        });
    }

    let scale = config.energy_scale();
    let tol = config.degeneracy_tol.abs() * scale;
    let e = config.referenced_e_l();
    let (dl, dr, u) = (config.delta_l, config.delta_r, config.u);
    let linear = [
        ("E_L-Delta_L", e - dl),
        ("E_L+Delta_L", e + dl),
        ("E_L-Delta_R", e - dr),
        ("E_L+Delta_R", e + dr),
        ("2E_L-U", 2.0 * e - u),
    ];
    for (factor, value) in linear {
        if value.abs() < tol {
            out.push(Violation::Degenerate { factor, value });
        }
    }
    let quad = dl * dl - dr * dr;
    if quad.abs() < tol * scale {
        out.push(Violation::Degenerate {
            factor: "Delta_L^2-Delta_R^2",
            value: quad,
        });
    }
    out
}

/// The four discrete lead energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadEnergies {
    /// Input electron k, at E_L + Delta_L.
    pub l_k: f64,
    /// Input electron k', at E_L - Delta_L.
    pub l_k_prime: f64,
    pub r1: f64,
    pub r2: f64,
}

impl LeadEnergies {
    /// Inverse map back to (E_L, Delta_L, Delta_R).
    pub fn parameters(&self) -> (f64, f64, f64) {
        (
            0.5 * (self.l_k + self.l_k_prime),
            0.5 * (self.l_k - self.l_k_prime),
            0.5 * (self.r1 - self.r2),
        )
    }
}

pub fn lead_energies(config: &EnergyConfig) -> Result<LeadEnergies> {
    config.validate()?;
    let (e, dl, dr) = (config.e_l, config.delta_l, config.delta_r);
    Ok(LeadEnergies {
        l_k: e + dl,
        l_k_prime: e - dl,
        r1: e + dr,
        r2: e - dr,
    })
}

/// Momentum slot of the E_L + Delta_L input electron.
pub const SLOT_K: u8 = 0;
/// Momentum slot of the E_L - Delta_L input electron.
pub const SLOT_K_PRIME: u8 = 1;

/// The ten-mode truncation: two input slots in L, one slot in each output
/// lead, one dot level, each with both spins.
pub fn build_registry(config: &EnergyConfig) -> Result<ModeRegistry> {
    let e = lead_energies(config)?;
    let mut modes = Vec::with_capacity(10);
    for spin in [Spin::Up, Spin::Down] {
        modes.push(Mode::new(Lead::L, SLOT_K, spin, e.l_k));
        modes.push(Mode::new(Lead::L, SLOT_K_PRIME, spin, e.l_k_prime));
        modes.push(Mode::new(Lead::R1, 0, spin, e.r1));
        modes.push(Mode::new(Lead::R2, 0, spin, e.r2));
        modes.push(Mode::new(Lead::Dot, 0, spin, config.eps_d));
    }
    ModeRegistry::new(modes)
}

/// Diagonal (unperturbed) energy of a basis state: lead and dot level
/// energies plus U when the dot is doubly occupied.
pub fn unperturbed_energy(config: &EnergyConfig, registry: &ModeRegistry, state: FockState) -> f64 {
    let mut energy = registry.occupied_energy(state);
    if dot_occupancy(registry, state) == 2 {
        energy += config.u;
    }
    energy
}

pub fn dot_occupancy(registry: &ModeRegistry, state: FockState) -> u32 {
    [Spin::Up, Spin::Down]
        .into_iter()
        .filter_map(|s| registry.index_of(Lead::Dot, 0, s))
        .filter(|&i| state.is_occupied(i))
        .count() as u32
}

/// Real symmetric Hamiltonian over one basis sector. Couplings are real, so
/// the Hermitian operator is stored as a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub basis: Vec<FockState>,
    pub matrix: DMatrix<f64>,
}

impl HamiltonianMatrix {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, state: FockState) -> Option<usize> {
        self.basis.binary_search(&state).ok()
    }

    /// Largest |H_ij - H_ji|.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    /// Largest |H_ij| between basis states of different particle number.
    pub fn number_mixing(&self) -> f64 {
        let n = self.dimension();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if self.basis[i].particle_count() != self.basis[j].particle_count() {
                    worst = worst.max(self.matrix[(i, j)].abs());
                }
            }
        }
        worst
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let x = state.to_dense(&self.basis)?;
        let n = self.dimension();
        let y: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|j| x[j] * self.matrix[(i, j)]).sum())
            .collect();
        Ok(StateVector::from_dense(&self.basis, &y))
    }
}

/// Hamiltonian on an arbitrary basis without validating `config`; allows
/// limits such as vanishing couplings that `validate_config` rejects.
pub fn hamiltonian_on_basis(
    config: &EnergyConfig,
    registry: &ModeRegistry,
    basis: Vec<FockState>,
) -> Result<HamiltonianMatrix> {
    let n = basis.len();
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    let find = |s: FockState| {
        basis
            .binary_search(&s)
            .map_err(|_| Error::Invariant(format!("hop left the basis: {}", registry.describe(s))))
    };
    for (col, &state) in basis.iter().enumerate() {
        matrix[(col, col)] = unperturbed_energy(config, registry, state);
        for (lead_idx, mode) in registry.modes().iter().enumerate() {
            if mode.lead == Lead::Dot {
                continue;
            }
            let dot_idx = registry
                .index_of(Lead::Dot, 0, mode.spin)
                .ok_or_else(|| Error::Invariant("registry has no dot level".into()))?;
            let v = config.coupling(mode.lead);
            // V a†_lead c_dot: dot -> lead
            if let Some((mid, s1)) = registry.apply_annihilation(state, dot_idx)? {
                if let Some((out, s2)) = registry.apply_creation(mid, lead_idx)? {
                    matrix[(find(out)?, col)] += v * f64::from(s1 * s2);
                }
            }
            // V c†_dot a_lead: lead -> dot
            if let Some((mid, s1)) = registry.apply_annihilation(state, lead_idx)? {
                if let Some((out, s2)) = registry.apply_creation(mid, dot_idx)? {
                    matrix[(find(out)?, col)] += v * f64::from(s1 * s2);
                }
            }
        }
    }
    Ok(HamiltonianMatrix { basis, matrix })
}

/// Hamiltonian restricted to the `n_particles` sector.
pub fn build_hamiltonian(
    config: &EnergyConfig,
    registry: &ModeRegistry,
    n_particles: usize,
) -> Result<HamiltonianMatrix> {
    config.validate()?;
    let basis = enumerate_basis(registry, n_particles)?;
    hamiltonian_on_basis(config, registry, basis)
}

/// Hamiltonian on the whole Fock space (all sectors), basis in bitstring
/// order. Only practical for small registries.
pub fn build_full_hamiltonian(config: &EnergyConfig, registry: &ModeRegistry) -> Result<HamiltonianMatrix> {
    config.validate()?;
    if registry.len() > 12 {
        return Err(Error::Usage(format!(
            "full Fock space of {} modes is too large",
            registry.len()
        )));
    }
    let basis = (0..1u64 << registry.len()).map(FockState).collect();
    hamiltonian_on_basis(config, registry, basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinPair {
    /// Spin of the k electron (E_L + Delta_L).
    pub sigma: Spin,
    /// Spin of the k' electron (E_L - Delta_L).
    pub sigma_prime: Spin,
}

impl SpinPair {
    pub const UP_DOWN: SpinPair = SpinPair {
        sigma: Spin::Up,
        sigma_prime: Spin::Down,
    };
    pub const UP_UP: SpinPair = SpinPair {
        sigma: Spin::Up,
        sigma_prime: Spin::Up,
    };

    pub fn new(sigma: Spin, sigma_prime: Spin) -> Self {
        SpinPair { sigma, sigma_prime }
    }

    pub fn is_same_spin(&self) -> bool {
        self.sigma == self.sigma_prime
    }
}

impl std::str::FromStr for SpinPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spin = |c| match c {
            'u' => Ok(Spin::Up),
            'd' => Ok(Spin::Down),
            _ => Err(Error::Usage(format!("bad spin pair '{s}', expected e.g. ud or uu"))),
        };
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 2 {
            return Err(Error::Usage(format!("bad spin pair '{s}', expected e.g. ud or uu")));
        }
        Ok(SpinPair::new(spin(chars[0])?, spin(chars[1])?))
    }
}

impl fmt::Display for SpinPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |s| if s == Spin::Up { 'u' } else { 'd' };
        write!(f, "{}{}", c(self.sigma), c(self.sigma_prime))
    }
}

/// `a†_{L,k,sigma} a†_{L,k',sigma'} |0>`.
pub fn build_initial_state(
    config: &EnergyConfig,
    registry: &ModeRegistry,
    spins: SpinPair,
) -> Result<StateVector> {
    config.validate()?;
    if spins.is_same_spin() && config.delta_l == 0.0 {
        return Err(Error::Usage(
            "equal spins with Delta_L = 0 put both electrons in the same mode".into(),
        ));
    }
    let k = registry
        .index_of(Lead::L, SLOT_K, spins.sigma)
        .ok_or_else(|| Error::Usage("registry has no L,k mode".into()))?;
    let kp = registry
        .index_of(Lead::L, SLOT_K_PRIME, spins.sigma_prime)
        .ok_or_else(|| Error::Usage("registry has no L,k' mode".into()))?;
    let state = StateVector::vacuum()
        .apply_creation(registry, kp)?
        .apply_creation(registry, k)?;
    if state.is_zero(0.0) {
        return Err(Error::Usage("initial state vanishes".into()));
    }
    Ok(state)
}
