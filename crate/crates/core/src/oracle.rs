//! Exact, non-perturbative reference: evolve the two-electron input state
//! under the full truncated Hamiltonian and watch the (R1, R2) output
//! population grow.
//!
//! The fourth-order transfer amplitude is tiny (about `V^4`) and rides on a
//! pair of nearly degenerate eigenvectors whose splitting is only about
//! `V^2`. A double precision eigensolver resolves their mixing to about
//! `eps |H| / V^2`, which is not enough for `V = 1e-3`. The propagator
//! therefore diagonalises in double-double arithmetic (cyclic Jacobi) and
//! drops to `f64` only for the final phase sums.

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::closedform::{total_singlet_closed_form, Params};
use crate::error::{Error, Result};
use crate::fock::{FockState, Lead, ModeRegistry, StateVector};
use crate::model::{build_hamiltonian, build_initial_state, build_registry, EnergyConfig, HamiltonianMatrix, SpinPair};
use crate::perturbation::spin_decompose;

pub const MAX_SECTOR_DIMENSION: usize = 2000;
const MAX_SWEEPS: usize = 60;
/// Off-diagonal Frobenius norm, relative to the full norm, at which Jacobi
/// stops.
const JACOBI_TOL: f64 = 1e-30;
/// Largest singlet probability still treated as perturbative.
pub const PERTURBATIVE_MAX_PROBABILITY: f64 = 1e-4;

type Dd = TwoFloat;

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

fn to_f64(x: Dd) -> f64 {
    f64::from(x)
}

/// Double-double quotient by long division; `TwoFloat`'s own `/` is only
/// accurate to about `1e-16` relative.
fn dd_div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    Dd::new_add(q1, q2) + q3
}

/// Eigendecomposition of a real symmetric matrix in double-double precision.
#[derive(Debug, Clone)]
pub struct SymmetricEigenDd {
    pub values: Vec<Dd>,
    /// Column-major: `vectors[k * n + i]` is component `i` of eigenvector `k`.
    pub vectors: Vec<Dd>,
    pub n: usize,
    /// Final off-diagonal norm relative to the matrix norm.
    pub residual: f64,
    pub sweeps: usize,
}

impl SymmetricEigenDd {
    pub fn vector(&self, k: usize) -> &[Dd] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }
}

/// Cyclic Jacobi diagonalisation. Symmetry of the input is assumed; only
/// the upper triangle is read.
pub fn jacobi_eigen(matrix: &nalgebra::DMatrix<f64>) -> Result<SymmetricEigenDd> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Usage("matrix is not square".into()));
    }
    let mut a = vec![dd(0.0); n * n];
    for i in 0..n {
        for j in i..n {
            a[i * n + j] = dd(matrix[(i, j)]);
            a[j * n + i] = dd(matrix[(i, j)]);
        }
    }
    let mut v = vec![dd(0.0); n * n];
    for i in 0..n {
        v[i * n + i] = dd(1.0);
    }
    let frob = to_f64(a.iter().fold(dd(0.0), |acc, &x| acc + x * x)).sqrt().max(f64::MIN_POSITIVE);

    let off_norm = |a: &[Dd]| -> f64 {
        let mut s = dd(0.0);
        for i in 0..n {
            for j in i + 1..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        (2.0 * to_f64(s)).sqrt()
    };

    let mut residual = off_norm(&a) / frob;
    let mut sweeps = 0;
    while residual > JACOBI_TOL {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric {
                message: format!("Jacobi did not converge in {MAX_SWEEPS} sweeps"),
                residual,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if to_f64(apq).abs() <= 1e-34 * frob {
                    a[p * n + q] = dd(0.0);
                    a[q * n + p] = dd(0.0);
                    continue;
                }
                let theta = dd_div(a[q * n + q] - a[p * n + p], dd(2.0) * apq);
                let t = if to_f64(theta).abs() > 1e100 {
                    dd_div(dd(0.5), theta)
                } else {
                    let mag = dd_div(dd(1.0), theta.abs() + (theta * theta + dd(1.0)).sqrt());
                    if to_f64(theta) < 0.0 {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = dd_div(dd(1.0), (t * t + dd(1.0)).sqrt());
                let s = t * c;
                // columns p, q
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                // rows p, q
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = dd(0.0);
                a[q * n + p] = dd(0.0);
                for k in 0..n {
                    let vp = v[p * n + k];
                    let vq = v[q * n + k];
                    v[p * n + k] = c * vp - s * vq;
                    v[q * n + k] = s * vp + c * vq;
                }
            }
        }
        residual = off_norm(&a) / frob;
    }
    Ok(SymmetricEigenDd {
        values: (0..n).map(|i| a[i * n + i]).collect(),
        vectors: v,
        n,
        residual,
        sweeps,
    })
}

/// `exp(-i H t)` on one particle-number sector.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: Vec<FockState>,
    eigen: SymmetricEigenDd,
    /// Phases are accumulated relative to this energy, then restored.
    reference: Dd,
}

/// Precomputed expansion of one initial state: `psi(t) = sum_n w[n] e^{-i (E_n - ref) t}`.
#[derive(Debug, Clone)]
pub struct Trajectory<'a> {
    propagator: &'a Propagator,
    /// `weights[n * dim + i] = Q_in c_n` rounded to f64.
    weights: Vec<Complex64>,
    shifts: Vec<f64>,
    initial: StateVector,
}

impl Propagator {
    pub fn new(hamiltonian: &HamiltonianMatrix) -> Result<Self> {
        if hamiltonian.dimension() > MAX_SECTOR_DIMENSION {
            return Err(Error::Usage(format!(
                "sector dimension {} exceeds {MAX_SECTOR_DIMENSION}",
                hamiltonian.dimension()
            )));
        }
        let eigen = jacobi_eigen(&hamiltonian.matrix)?;
        Ok(Propagator {
            basis: hamiltonian.basis.clone(),
            eigen,
            reference: dd(0.0),
        })
    }

    /// Sets the energy that phases are measured from (a global phase only).
    pub fn with_reference(mut self, energy: f64) -> Self {
        self.reference = dd(energy);
        self
    }

    pub fn basis(&self) -> &[FockState] {
        &self.basis
    }

    pub fn eigen(&self) -> &SymmetricEigenDd {
        &self.eigen
    }

    pub fn trajectory(&self, initial: &StateVector) -> Result<Trajectory<'_>> {
        let n = self.basis.len();
        let x = initial.to_dense(&self.basis)?;
        let (xr, xi): (Vec<Dd>, Vec<Dd>) = x.iter().map(|z| (dd(z.re), dd(z.im))).unzip();
        let mut weights = Vec::with_capacity(n * n);
        for k in 0..n {
            let q = self.eigen.vector(k);
            let mut cr = dd(0.0);
            let mut ci = dd(0.0);
            for i in 0..n {
                cr += q[i] * xr[i];
                ci += q[i] * xi[i];
            }
            for &qi in q {
                weights.push(Complex64::new(to_f64(qi * cr), to_f64(qi * ci)));
            }
        }
        let shifts = self
            .eigen
            .values
            .iter()
            .map(|&e| to_f64(e - self.reference))
            .collect();
        Ok(Trajectory {
            propagator: self,
            weights,
            shifts,
            initial: StateVector::from_dense(&self.basis, &x),
        })
    }

    pub fn evolve(&self, initial: &StateVector, t: f64) -> Result<StateVector> {
        self.trajectory(initial)?.at(t)
    }
}

impl Trajectory<'_> {
    pub fn at(&self, t: f64) -> Result<StateVector> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Usage(format!("evolution time must be finite and >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(self.initial.clone());
        }
        let n = self.propagator.basis.len();
        let mut psi = vec![Complex64::default(); n];
        for (k, &shift) in self.shifts.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -shift * t);
            for (p, w) in psi.iter_mut().zip(&self.weights[k * n..(k + 1) * n]) {
                *p += w * phase;
            }
        }
        let global = Complex64::from_polar(1.0, -to_f64(self.propagator.reference) * t);
        for p in psi.iter_mut() {
            *p *= global;
        }
        Ok(StateVector::from_dense(&self.propagator.basis, &psi))
    }
}

/// `exp(-i H t) |initial>` for the sector holding `initial`.
pub fn evolve(config: &EnergyConfig, initial: &StateVector, t: f64) -> Result<StateVector> {
    let registry = build_registry(config)?;
    let n = initial
        .iter()
        .next()
        .map(|(s, _)| s.particle_count() as usize)
        .ok_or_else(|| Error::Usage("cannot evolve the zero vector".into()))?;
    if initial.iter().any(|(s, _)| s.particle_count() as usize != n) {
        return Err(Error::Usage("initial state mixes particle numbers".into()));
    }
    let h = build_hamiltonian(config, &registry, n)?;
    Propagator::new(&h)?.evolve(initial, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub p_singlet: Vec<f64>,
    pub p_triplet_total: Vec<f64>,
    /// Everything that is neither in (R1, R2) nor still in L.
    pub p_leak: Vec<f64>,
    /// Both electrons still in the input lead.
    pub p_remaining: Vec<f64>,
    pub norm: Vec<f64>,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Output,
    Input,
    Other,
}

fn region(registry: &ModeRegistry, state: FockState) -> Region {
    let count = |lead| state.occupied().filter(|&i| registry.mode(i).lead == lead).count();
    let n = state.particle_count() as usize;
    if count(Lead::R1) == 1 && count(Lead::R2) == 1 && n == 2 {
        Region::Output
    } else if count(Lead::L) == n {
        Region::Input
    } else {
        Region::Other
    }
}

pub fn transition_probabilities(
    config: &EnergyConfig,
    spins: SpinPair,
    times: &[f64],
) -> Result<EvolutionResult> {
    let registry = build_registry(config)?;
    let h = build_hamiltonian(config, &registry, 2)?;
    let initial = build_initial_state(config, &registry, spins)?;
    let propagator = Propagator::new(&h)?.with_reference(2.0 * config.e_l);
    let trajectory = propagator.trajectory(&initial)?;
    let regions: Vec<Region> = h.basis.iter().map(|&s| region(&registry, s)).collect();

    let mut out = EvolutionResult {
        times: times.to_vec(),
        p_singlet: Vec::with_capacity(times.len()),
        p_triplet_total: Vec::with_capacity(times.len()),
        p_leak: Vec::with_capacity(times.len()),
        p_remaining: Vec::with_capacity(times.len()),
        norm: Vec::with_capacity(times.len()),
        norm_drift: 0.0,
    };
    for &t in times {
        let psi = trajectory.at(t)?;
        let mut leak = 0.0;
        let mut remaining = 0.0;
        for ((_, a), r) in psi.iter().zip(&regions) {
            match r {
                Region::Input => remaining += a.norm_sqr(),
                Region::Other => leak += a.norm_sqr(),
                Region::Output => {}
            }
        }
        let output = psi.restrict(|s| region(&registry, s) == Region::Output);
        let d = spin_decompose(&output, &registry)?;
        let norm = psi.norm();
        out.p_singlet.push(d.singlet_weight());
        out.p_triplet_total.push(d.triplet_weight());
        out.p_leak.push(leak);
        out.p_remaining.push(remaining);
        out.norm.push(norm);
        out.norm_drift = out.norm_drift.max((norm - 1.0).abs());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub coefficient: f64,
    /// RMS misfit in the same units as the coefficient.
    pub residual: f64,
}

impl QuadraticFit {
    pub fn relative_residual(&self) -> f64 {
        if self.coefficient == 0.0 {
            if self.residual == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.residual / self.coefficient.abs()
        }
    }
}

/// Least-squares fit of `P_singlet = c t^2` through the origin.
pub fn fit_quadratic_growth(result: &EvolutionResult) -> Result<QuadraticFit> {
    fit_quadratic(&result.times, &result.p_singlet)
}

pub fn fit_quadratic(times: &[f64], probabilities: &[f64]) -> Result<QuadraticFit> {
    if times.len() != probabilities.len() {
        return Err(Error::Usage("time and probability series differ in length".into()));
    }
    if times.len() < 5 {
        return Err(Error::Regime(format!("{} time points, need at least 5", times.len())));
    }
    if let Some(p) = probabilities.iter().find(|&&p| p > PERTURBATIVE_MAX_PROBABILITY) {
        return Err(Error::Regime(format!(
            "singlet probability {p:e} exceeds {PERTURBATIVE_MAX_PROBABILITY:e}"
        )));
    }
    let s4: f64 = times.iter().map(|t| t.powi(4)).sum();
    if s4 == 0.0 {
        return Err(Error::Regime("all time points are zero".into()));
    }
    let s2p: f64 = times.iter().zip(probabilities).map(|(t, p)| t * t * p).sum();
    let c = s2p / s4;
    let sse: f64 = times
        .iter()
        .zip(probabilities)
        .map(|(t, p)| (p - c * t * t).powi(2))
        .sum();
    Ok(QuadraticFit {
        coefficient: c,
        residual: (sse / s4).sqrt(),
    })
}

/// Expected `c` in `P_singlet ~ c t^2`: the normalised singlet carries
/// twice the squared coefficient of the unnormalised `|S>`.
pub fn predicted_growth(config: &EnergyConfig) -> Result<f64> {
    let coeff = total_singlet_closed_form(&Params::from(config))?;
    Ok(2.0 * (config.coupling_product() * coeff).powi(2))
}

/// Smallest energy denominator of the fourth-order amplitude:
/// `|E_L -/+ Delta_L|`, `|E_L -/+ Delta_R|`, `|Delta_R -/+ Delta_L|`, `|2E_L - U|`.
pub fn smallest_denominator(config: &EnergyConfig) -> f64 {
    let (e, dl, dr, u) = (config.referenced_e_l(), config.delta_l, config.delta_r, config.u);
    [e - dl, e + dl, e - dr, e + dr, dr - dl, dr + dl, 2.0 * e - u]
        .iter()
        .map(|x| x.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Couplings at most this fraction of [`smallest_denominator`] are treated
/// as weak.
pub const WEAK_COUPLING_RATIO: f64 = 0.01;

pub fn is_weak_coupling(config: &EnergyConfig) -> bool {
    config.v_l.max(config.v_r1).max(config.v_r2) <= WEAK_COUPLING_RATIO * smallest_denominator(config)
}

/// Difference between the second-order level shifts of the output and input
/// pairs. Each lead electron at energy `e` coupled by `v` to the empty dot
/// shifts by `v^2 / (e - eps_d)`.
pub fn second_order_detuning(config: &EnergyConfig) -> f64 {
    let shift = |e: f64, v: f64| v * v / (e - config.eps_d);
    let (e, dl, dr) = (config.e_l, config.delta_l, config.delta_r);
    let input = shift(e + dl, config.v_l) + shift(e - dl, config.v_l);
    let output = shift(e + dr, config.v_r1) + shift(e - dr, config.v_r2);
    output - input
}

/// Largest `detuning * t` on the on-shell window; bounds the bias of a
/// pure `t^2` fit to about `(0.13)^2 / 12`.
pub const MAX_DETUNING_PHASE: f64 = 0.13;

/// Time grid `[t0, 2 t0]` on which the transfer amplitude grows linearly:
/// long after the virtual-state transients and before the second-order
/// detuning dephases input and output. `t0 = 1/V^2` for the largest
/// coupling `V`, reduced when the detuning would exceed
/// [`MAX_DETUNING_PHASE`] at `2 t0`.
pub fn on_shell_window(config: &EnergyConfig, points: usize) -> Vec<f64> {
    let v = config.v_l.max(config.v_r1).max(config.v_r2);
    let delta = second_order_detuning(config).abs();
    let mut start = 1.0 / (v * v);
    if delta * 2.0 * start > MAX_DETUNING_PHASE {
        start = MAX_DETUNING_PHASE / (2.0 * delta);
    }
    linspace(start, 2.0 * start, points)
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub fit: QuadraticFit,
    pub predicted: f64,
    pub relative_difference: f64,
    /// Largest `P_triplet / P_singlet` on the grid.
    pub max_triplet_ratio: f64,
    pub norm_drift: f64,
}

pub fn compare_with_closed_form(config: &EnergyConfig, times: &[f64]) -> Result<OracleComparison> {
    let result = transition_probabilities(config, SpinPair::UP_DOWN, times)?;
    let fit = fit_quadratic_growth(&result)?;
    let predicted = predicted_growth(config)?;
    let max_triplet_ratio = result
        .p_singlet
        .iter()
        .zip(&result.p_triplet_total)
        .filter(|(s, _)| **s > 0.0)
        .map(|(s, t)| t / s)
        .fold(0.0, f64::max);
    Ok(OracleComparison {
        fit,
        predicted,
        relative_difference: (fit.coefficient - predicted).abs() / predicted.abs(),
        max_triplet_ratio,
        norm_drift: result.norm_drift,
    })
}
