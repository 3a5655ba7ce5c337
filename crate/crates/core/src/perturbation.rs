//! Fourth-order time-ordered perturbation theory in the lead-dot tunneling.
//!
//! Every ordering of the four tunneling vertices (two electrons in from L, one
//! out to R1, one out to R2) is applied to the input state with exact
//! fermionic signs. Its resolvent amplitude is
//!
//! ```text
//!   (product of couplings and signs) / prod_j (E_i - E_j)
//! ```
//!
//! where `E_j` are the unperturbed energies of the three intermediate states.
//! Amplitudes are reported with the coupling product `V_L^2 V_R1 V_R2`
//! divided out ("C-stripped"), so they are directly comparable with the
//! closed forms.

use std::fmt;
use std::ops::Add;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, Lead, ModeRegistry, Spin, StateVector};
use crate::model::{
    build_initial_state, build_registry, dot_occupancy, unperturbed_energy, EnergyConfig, SpinPair,
    SLOT_K, SLOT_K_PRIME,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    /// Lead electron tunnels onto the dot: `c†_s a_{L,k,s}`.
    In,
    /// Dot electron tunnels into an output lead: `a†_{R,s} c_s`.
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub kind: VertexKind,
    pub lead: Lead,
    pub slot: u8,
    pub spin: Spin,
    pub coupling: f64,
}

impl Vertex {
    fn same_shape(&self, other: &Vertex) -> bool {
        self.kind == other.kind
            && self.lead == other.lead
            && self.slot == other.slot
            && self.spin == other.spin
    }

    fn apply(&self, registry: &ModeRegistry, state: FockState) -> Result<Option<(FockState, i8)>> {
        let lead_idx = registry
            .index_of(self.lead, self.slot, self.spin)
            .ok_or_else(|| Error::Usage(format!("no mode {}{} {}", self.lead, self.slot, self.spin)))?;
        let dot_idx = registry
            .index_of(Lead::Dot, 0, self.spin)
            .ok_or_else(|| Error::Usage("registry has no dot level".into()))?;
        let (first, second) = match self.kind {
            VertexKind::In => (lead_idx, dot_idx),
            VertexKind::Out => (dot_idx, lead_idx),
        };
        let Some((mid, s1)) = registry.apply_annihilation(state, first)? else {
            return Ok(None);
        };
        let Some((out, s2)) = registry.apply_creation(mid, second)? else {
            return Ok(None);
        };
        Ok(Some((out, s1 * s2)))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.spin == Spin::Up { "u" } else { "d" };
        match self.kind {
            VertexKind::In => write!(f, "in(L{}{s})", self.slot),
            VertexKind::Out => write!(f, "out({}{s})", self.lead),
        }
    }
}

/// One time-ordering of the four vertices; `vertices[0]` acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    pub vertices: [Vertex; 4],
    pub initial_energy: f64,
    pub intermediate_energies: [f64; 3],
    pub final_state: FockState,
    /// Product of fermionic signs, including the sign of the input state.
    pub sign: i8,
    /// C-stripped resolvent amplitude.
    pub amplitude: Complex64,
}

impl Ordering {
    /// Contribution of this ordering to the output state.
    pub fn output(&self) -> StateVector {
        StateVector::basis(self.final_state, self.amplitude)
    }

    /// Output with every energy denominator set to one: only the vertex
    /// signs survive.
    pub fn signed_unit_output(&self) -> StateVector {
        StateVector::basis(self.final_state, Complex64::new(f64::from(self.sign), 0.0))
    }

    /// Pattern of in/out vertices, e.g. "ioio".
    pub fn pattern(&self) -> String {
        self.vertices
            .iter()
            .map(|v| if v.kind == VertexKind::In { 'i' } else { 'o' })
            .collect()
    }

    pub fn visits_double_occupancy(&self) -> bool {
        self.vertices[0].kind == VertexKind::In && self.vertices[1].kind == VertexKind::In
    }

    fn ins(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::In)
    }

    fn outs(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Out)
    }

    /// Vertex sequence with the output leads R1 and R2 interchanged.
    pub fn exchanged_vertices(&self, config: &EnergyConfig) -> [Vertex; 4] {
        let mut v = self.vertices;
        for x in v.iter_mut() {
            if x.kind == VertexKind::Out {
                x.lead = match x.lead {
                    Lead::R1 => Lead::R2,
                    Lead::R2 => Lead::R1,
                    other => other,
                };
                x.coupling = config.coupling(x.lead);
            }
        }
        v
    }

    fn same_sequence(&self, vertices: &[Vertex; 4]) -> bool {
        self.vertices.iter().zip(vertices).all(|(a, b)| a.same_shape(b))
    }

    pub fn describe(&self) -> String {
        self.vertices
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

struct Replay {
    final_state: FockState,
    sign: i8,
    states: [FockState; 3],
    energies: [f64; 3],
}

fn replay(
    config: &EnergyConfig,
    registry: &ModeRegistry,
    start: FockState,
    vertices: &[Vertex; 4],
) -> Result<Option<Replay>> {
    let mut state = start;
    let mut sign = 1i8;
    let mut states = [FockState::VACUUM; 3];
    let mut energies = [0.0; 3];
    for (j, v) in vertices.iter().enumerate() {
        let Some((next, s)) = v.apply(registry, state)? else {
            return Ok(None);
        };
        state = next;
        sign *= s;
        if j < 3 {
            states[j] = state;
            energies[j] = unperturbed_energy(config, registry, state);
        }
    }
    Ok(Some(Replay {
        final_state: state,
        sign,
        states,
        energies,
    }))
}

/// Names an energy denominator `E_i - E_j` in terms of E_L, Delta_L, Delta_R
/// and U by comparing the intermediate state with the input state.
fn denominator_name(registry: &ModeRegistry, initial: FockState, intermediate: FockState) -> String {
    let occupied = |state: FockState, lead, slot| {
        [Spin::Up, Spin::Down]
            .into_iter()
            .filter_map(|s| registry.index_of(lead, slot, s))
            .filter(|&i| state.is_occupied(i))
            .count() as i32
    };
    let emptied = |slot| occupied(initial, Lead::L, slot) - occupied(intermediate, Lead::L, slot);
    let (k, kp) = (emptied(SLOT_K), emptied(SLOT_K_PRIME));
    let (r1, r2) = (occupied(intermediate, Lead::R1, 0), occupied(intermediate, Lead::R2, 0));
    let c_e = k + kp - r1 - r2;
    let c_dl = k - kp;
    let c_dr = r2 - r1;
    let double = dot_occupancy(registry, intermediate) == 2;

    let mut out = String::new();
    let mut term = |coef: i32, sym: &str| {
        if coef == 0 {
            return;
        }
        let sign = if coef < 0 {
            "-"
        } else if out.is_empty() {
            ""
        } else {
            "+"
        };
        let mag = coef.abs();
        if mag == 1 {
            out.push_str(&format!("{sign}{sym}"));
        } else {
            out.push_str(&format!("{sign}{mag}{sym}"));
        }
    };
    term(c_e, "E_L");
    term(c_dl, "Delta_L");
    term(c_dr, "Delta_R");
    if double {
        term(-1, "U");
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn input_basis_state(
    config: &EnergyConfig,
    registry: &ModeRegistry,
    spins: SpinPair,
) -> Result<(FockState, i8)> {
    let init = build_initial_state(config, registry, spins)?;
    let (state, amp) = init
        .iter()
        .next()
        .ok_or_else(|| Error::Invariant("empty input state".into()))?;
    Ok((state, if amp.re < 0.0 { -1 } else { 1 }))
}

fn checked_amplitude(
    config: &EnergyConfig,
    registry: &ModeRegistry,
    initial: FockState,
    input_sign: i8,
    vertices: &[Vertex; 4],
) -> Result<Option<(Replay, Complex64)>> {
    let Some(r) = replay(config, registry, initial, vertices)? else {
        return Ok(None);
    };
    let e_i = unperturbed_energy(config, registry, initial);
    let tol = config.degeneracy_tol * config.energy_scale();
    let mut value = f64::from(r.sign * input_sign);
    for v in vertices {
        value *= v.coupling;
    }
    for (state, e_j) in r.states.iter().zip(r.energies) {
        let d = e_i - e_j;
        if d.abs() < tol {
            return Err(Error::Pole {
                factor: denominator_name(registry, initial, *state),
                value: d,
            });
        }
        value /= d;
    }
    let stripped = value / config.coupling_product();
    Ok(Some((r, Complex64::new(stripped, 0.0))))
}

/// C-stripped resolvent amplitude of one ordering, recomputed from the model
/// energies.
pub fn ordering_amplitude(ordering: &Ordering, config: &EnergyConfig, spins: SpinPair) -> Result<Complex64> {
    config.validate()?;
    let registry = build_registry(config)?;
    let (initial, input_sign) = input_basis_state(config, &registry, spins)?;
    checked_amplitude(config, &registry, initial, input_sign, &ordering.vertices)?
        .map(|(_, a)| a)
        .ok_or_else(|| Error::Usage(format!("ordering {} annihilates the input", ordering.describe())))
}

/// Every vertex ordering that carries the input pair into one R1 and one R2
/// electron.
pub fn enumerate_orderings(config: &EnergyConfig, spins: SpinPair) -> Result<Vec<Ordering>> {
    config.validate()?;
    let registry = build_registry(config)?;
    let (initial, input_sign) = input_basis_state(config, &registry, spins)?;
    let e_i = unperturbed_energy(config, &registry, initial);

    let mut candidates = Vec::new();
    for idx in initial.occupied() {
        let m = registry.mode(idx);
        if m.lead == Lead::L {
            candidates.push(Vertex {
                kind: VertexKind::In,
                lead: Lead::L,
                slot: m.slot,
                spin: m.spin,
                coupling: config.v_l,
            });
        }
    }
    for lead in [Lead::R1, Lead::R2] {
        for spin in [Spin::Up, Spin::Down] {
            candidates.push(Vertex {
                kind: VertexKind::Out,
                lead,
                slot: 0,
                spin,
                coupling: config.coupling(lead),
            });
        }
    }

    let n = candidates.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let picks = [a, b, c, d];
                    let vertices = picks.map(|i| candidates[i]);
                    if !is_complete_process(&picks, &vertices) {
                        continue;
                    }
                    let Some((r, amplitude)) =
                        checked_amplitude(config, &registry, initial, input_sign, &vertices)?
                    else {
                        continue;
                    };
                    out.push(Ordering {
                        vertices,
                        initial_energy: e_i,
                        intermediate_energies: r.energies,
                        final_state: r.final_state,
                        sign: r.sign * input_sign,
                        amplitude,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Two distinct input electrons, one exit into R1 and one into R2.
fn is_complete_process(picks: &[usize; 4], vertices: &[Vertex; 4]) -> bool {
    let ins: Vec<usize> = picks
        .iter()
        .zip(vertices)
        .filter(|(_, v)| v.kind == VertexKind::In)
        .map(|(p, _)| *p)
        .collect();
    let r1 = vertices.iter().filter(|v| v.kind == VertexKind::Out && v.lead == Lead::R1).count();
    let r2 = vertices.iter().filter(|v| v.kind == VertexKind::Out && v.lead == Lead::R2).count();
    ins.len() == 2 && ins[0] != ins[1] && r1 == 1 && r2 == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathLabel {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl PathLabel {
    pub const ALL: [PathLabel; 6] = [
        PathLabel::I,
        PathLabel::II,
        PathLabel::III,
        PathLabel::IV,
        PathLabel::V,
        PathLabel::VI,
    ];

    /// Paths that never doubly occupy the dot.
    pub fn avoids_charging(self) -> bool {
        matches!(self, PathLabel::I | PathLabel::IV)
    }

    /// Set A: the E_L - Delta_L electron enters the dot first.
    pub fn in_set_a(self) -> bool {
        matches!(self, PathLabel::I | PathLabel::II | PathLabel::III)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PathLabel::I => "I",
            PathLabel::II => "II",
            PathLabel::III => "III",
            PathLabel::IV => "IV",
            PathLabel::V => "V",
            PathLabel::VI => "VI",
        }
    }
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PathLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PathLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown path label '{s}'")))
    }
}

/// Output amplitudes in the singlet/triplet basis of one R1 and one R2
/// electron, using the unnormalised states
/// `|S>, |T0> = a†_{R1 up} a†_{R2 down} |0> -/+ a†_{R1 down} a†_{R2 up} |0>`
/// and `|T+> = a†_{R1 up} a†_{R2 up} |0>`, `|T-> = a†_{R1 down} a†_{R2 down} |0>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpinDecomposition {
    pub singlet: Complex64,
    pub triplet_m0: Complex64,
    pub triplet_up: Complex64,
    pub triplet_down: Complex64,
}

impl SpinDecomposition {
    pub fn triplet_magnitude(&self) -> f64 {
        self.triplet_m0
            .norm()
            .max(self.triplet_up.norm())
            .max(self.triplet_down.norm())
    }

    pub fn max_magnitude(&self) -> f64 {
        self.singlet.norm().max(self.triplet_magnitude())
    }

    /// Probability weight on the normalised singlet.
    pub fn singlet_weight(&self) -> f64 {
        2.0 * self.singlet.norm_sqr()
    }

    /// Probability weight on the three normalised triplets.
    pub fn triplet_weight(&self) -> f64 {
        2.0 * self.triplet_m0.norm_sqr() + self.triplet_up.norm_sqr() + self.triplet_down.norm_sqr()
    }

    /// Expands back into the occupation basis.
    pub fn reconstruct(&self, registry: &ModeRegistry) -> Result<StateVector> {
        let mut out = StateVector::new();
        for (s1, s2, amp) in [
            (Spin::Up, Spin::Down, self.singlet + self.triplet_m0),
            (Spin::Down, Spin::Up, self.triplet_m0 - self.singlet),
            (Spin::Up, Spin::Up, self.triplet_up),
            (Spin::Down, Spin::Down, self.triplet_down),
        ] {
            let (state, sign) = output_pair(registry, s1, s2)?;
            if amp != Complex64::default() {
                out.add(state, amp * f64::from(sign));
            }
        }
        Ok(out)
    }
}

impl Add for SpinDecomposition {
    type Output = SpinDecomposition;

    fn add(self, o: SpinDecomposition) -> SpinDecomposition {
        SpinDecomposition {
            singlet: self.singlet + o.singlet,
            triplet_m0: self.triplet_m0 + o.triplet_m0,
            triplet_up: self.triplet_up + o.triplet_up,
            triplet_down: self.triplet_down + o.triplet_down,
        }
    }
}

/// `a†_{R1,s1} a†_{R2,s2} |0>` as a basis state and sign.
pub fn output_pair(registry: &ModeRegistry, s1: Spin, s2: Spin) -> Result<(FockState, i8)> {
    let i1 = registry
        .index_of(Lead::R1, 0, s1)
        .ok_or_else(|| Error::Usage("registry has no R1 mode".into()))?;
    let i2 = registry
        .index_of(Lead::R2, 0, s2)
        .ok_or_else(|| Error::Usage("registry has no R2 mode".into()))?;
    let (mid, a) = registry
        .apply_creation(FockState::VACUUM, i2)?
        .ok_or_else(|| Error::Invariant("creation on vacuum vanished".into()))?;
    let (state, b) = registry
        .apply_creation(mid, i1)?
        .ok_or_else(|| Error::Invariant("R1 and R2 share a mode".into()))?;
    Ok((state, a * b))
}

/// Relative weight outside R1 x R2 above which `spin_decompose` refuses.
/// Relative size, against the largest single ordering, below which a sum of
/// orderings cannot be distinguished from zero in double precision.
pub const ROUNDING_TOL: f64 = 1e-13;

pub const SECTOR_LEAK_TOL: f64 = 1e-12;

pub fn spin_decompose(output: &StateVector, registry: &ModeRegistry) -> Result<SpinDecomposition> {
    let component = |s1, s2| -> Result<(FockState, Complex64)> {
        let (state, sign) = output_pair(registry, s1, s2)?;
        Ok((state, output.get(state) * f64::from(sign)))
    };
    let (ud_s, ud) = component(Spin::Up, Spin::Down)?;
    let (du_s, du) = component(Spin::Down, Spin::Up)?;
    let (uu_s, uu) = component(Spin::Up, Spin::Up)?;
    let (dd_s, dd) = component(Spin::Down, Spin::Down)?;

    let inside = [ud_s, du_s, uu_s, dd_s];
    let leak: f64 = output
        .iter()
        .filter(|(s, _)| !inside.contains(s))
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if leak > SECTOR_LEAK_TOL * output.norm() {
        return Err(Error::SectorLeak { weight: leak });
    }
    Ok(SpinDecomposition {
        singlet: (ud - du) * 0.5,
        triplet_m0: (ud + du) * 0.5,
        triplet_up: uu,
        triplet_down: dd,
    })
}

/// The two orderings of one path, related by exchanging R1 and R2.
#[derive(Debug, Clone, PartialEq)]
pub struct PathAmplitude {
    pub label: PathLabel,
    pub orderings: [Ordering; 2],
    pub decomposition: SpinDecomposition,
}

impl PathAmplitude {
    pub fn singlet_coeff(&self) -> Complex64 {
        self.decomposition.singlet
    }

    pub fn triplet0_coeff(&self) -> Complex64 {
        self.decomposition.triplet_m0
    }

    pub fn output(&self) -> StateVector {
        let mut v = self.orderings[0].output();
        for (s, a) in self.orderings[1].output().iter() {
            v.add(s, a);
        }
        v
    }
}

fn classify(ordering: &Ordering) -> Result<PathLabel> {
    let ins: Vec<&Vertex> = ordering.ins().collect();
    let first_out = ordering
        .outs()
        .next()
        .ok_or_else(|| Error::Invariant("ordering without exit vertex".into()))?;
    let set_a = match ins[0].slot {
        SLOT_K_PRIME => true,
        SLOT_K => false,
        s => return Err(Error::Invariant(format!("unexpected input slot {s}"))),
    };
    let label = match ordering.pattern().as_str() {
        "ioio" => {
            if set_a {
                PathLabel::I
            } else {
                PathLabel::IV
            }
        }
        "iioo" => {
            // last in, first out
            let lifo = first_out.spin == ins[1].spin;
            match (set_a, lifo) {
                (true, true) => PathLabel::II,
                (true, false) => PathLabel::III,
                (false, true) => PathLabel::V,
                (false, false) => PathLabel::VI,
            }
        }
        p => {
            return Err(Error::Invariant(format!(
                "ordering {} has unexpected pattern {p}",
                ordering.describe()
            )))
        }
    };
    Ok(label)
}

/// Pairs orderings related by R1 <-> R2 exchange and labels the pairs.
pub fn group_into_paths(
    orderings: &[Ordering],
    config: &EnergyConfig,
    registry: &ModeRegistry,
) -> Result<Vec<PathAmplitude>> {
    let mut used = vec![false; orderings.len()];
    let mut paths = Vec::new();
    for i in 0..orderings.len() {
        if used[i] {
            continue;
        }
        let swapped = orderings[i].exchanged_vertices(config);
        let j = (0..orderings.len())
            .find(|&j| j != i && !used[j] && orderings[j].same_sequence(&swapped))
            .ok_or_else(|| {
                Error::Invariant(format!(
                    "ordering {} has no R1<->R2 partner",
                    orderings[i].describe()
                ))
            })?;
        used[i] = true;
        used[j] = true;
        let label = classify(&orderings[i])?;
        if classify(&orderings[j])? != label {
            return Err(Error::Invariant(format!(
                "partners {} and {} classify differently",
                orderings[i].describe(),
                orderings[j].describe()
            )));
        }
        // R1 exit first
        let pair = if orderings[i].outs().next().map(|v| v.lead) == Some(Lead::R1) {
            [orderings[i].clone(), orderings[j].clone()]
        } else {
            [orderings[j].clone(), orderings[i].clone()]
        };
        let mut out = pair[0].output();
        for (s, a) in pair[1].output().iter() {
            out.add(s, a);
        }
        paths.push(PathAmplitude {
            label,
            decomposition: spin_decompose(&out, registry)?,
            orderings: pair,
        });
    }
    paths.sort_by_key(|p| p.label);
    if paths.windows(2).any(|w| w[0].label == w[1].label) {
        return Err(Error::Invariant("two vertex pairs received the same path label".into()));
    }
    Ok(paths)
}

pub fn path_amplitudes(config: &EnergyConfig, spins: SpinPair) -> Result<Vec<PathAmplitude>> {
    let registry = build_registry(config)?;
    let orderings = enumerate_orderings(config, spins)?;
    group_into_paths(&orderings, config, &registry)
}

/// Sum of all ordering amplitudes, spin-decomposed (C-stripped units).
pub fn total_output(config: &EnergyConfig, spins: SpinPair) -> Result<SpinDecomposition> {
    let registry = build_registry(config)?;
    let mut total = StateVector::new();
    for o in enumerate_orderings(config, spins)? {
        total.add(o.final_state, o.amplitude);
    }
    spin_decompose(&total, &registry)
}
