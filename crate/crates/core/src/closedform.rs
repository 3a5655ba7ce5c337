//! Direct evaluation of the rational closed forms for the six co-tunneling
//! paths, the two first-electron sets, and the total singlet output.
//!
//! All results are C-stripped: the coupling product and the on-shell time
//! factor are omitted. Energies are measured from the dot level.
//!
//! The singlet coefficients are the published expressions verbatim. For the
//! triplet coefficients of the charged paths (II, III, V, VI) the published
//! numerators carry a spurious factor `(E_L -/+ Delta_L)` that breaks the
//! scaling dimension; [`path_closed_form`] returns the dimensionally
//! consistent form `+/- Delta_R`, and [`printed_triplet`] keeps the
//! published one for comparison.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{EnergyConfig, DEFAULT_DEGENERACY_TOL};
use crate::perturbation::PathLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub e_l: f64,
    pub delta_l: f64,
    pub delta_r: f64,
    pub u: f64,
    pub degeneracy_tol: f64,
}

impl Params {
    pub fn new(e_l: f64, delta_l: f64, delta_r: f64, u: f64) -> Self {
        Params {
            e_l,
            delta_l,
            delta_r,
            u,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
        }
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    fn scale(&self) -> f64 {
        self.e_l.abs().max(self.delta_r.abs()).max(self.u.abs()).max(1.0)
    }

    fn check_poles(&self) -> Result<()> {
        let (e, dl, dr, u) = (self.e_l, self.delta_l, self.delta_r, self.u);
        let tol = self.degeneracy_tol * self.scale();
        for (factor, value) in [
            ("E_L-Delta_L", e - dl),
            ("E_L+Delta_L", e + dl),
            ("E_L-Delta_R", e - dr),
            ("E_L+Delta_R", e + dr),
            ("Delta_L-Delta_R", dl - dr),
            ("Delta_L+Delta_R", dl + dr),
            ("2E_L-U", 2.0 * e - u),
        ] {
            if value.abs() < tol {
                return Err(Error::Pole {
                    factor: factor.to_string(),
                    value,
                });
            }
        }
        Ok(())
    }
}

impl From<&EnergyConfig> for Params {
    fn from(c: &EnergyConfig) -> Self {
        Params {
            e_l: c.referenced_e_l(),
            delta_l: c.delta_l,
            delta_r: c.delta_r,
            u: c.u,
            degeneracy_tol: c.degeneracy_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormResult {
    pub singlet: f64,
    pub triplet0: f64,
}

fn path_parts(label: PathLabel, p: &Params) -> (f64, f64, f64) {
    let (e, dl, dr, u) = (p.e_l, p.delta_l, p.delta_r, p.u);
    let e2 = e * e - dr * dr;
    let split = dl * dl - dr * dr;
    match label {
        PathLabel::I => (dr * dr - dl * e, -dr * (e - dl), (e - dl) * e2 * split),
        PathLabel::II => (e, dr, (e - dl) * e2 * (2.0 * e - u)),
        PathLabel::III => (e, -dr, (e - dl) * e2 * (2.0 * e - u)),
        PathLabel::IV => (dr * dr + dl * e, dr * (e + dl), (e + dl) * e2 * split),
        PathLabel::V => (e, -dr, (e + dl) * e2 * (2.0 * e - u)),
        PathLabel::VI => (e, dr, (e + dl) * e2 * (2.0 * e - u)),
    }
}

pub fn path_closed_form(label: PathLabel, p: &Params) -> Result<ClosedFormResult> {
    p.check_poles()?;
    let (s, t, d) = path_parts(label, p);
    Ok(ClosedFormResult {
        singlet: s / d,
        triplet0: t / d,
    })
}

/// Triplet coefficient exactly as published, including the extra
/// `(E_L -/+ Delta_L)` numerator factor on paths II, III, V and VI.
pub fn printed_triplet(label: PathLabel, p: &Params) -> Result<f64> {
    p.check_poles()?;
    let (e, dl, dr) = (p.e_l, p.delta_l, p.delta_r);
    let (_, _, d) = path_parts(label, p);
    let numerator = match label {
        PathLabel::I => -dr * (e - dl),
        PathLabel::II => -dr * (e - dl),
        PathLabel::III => dr * (e - dl),
        PathLabel::IV => dr * (e + dl),
        PathLabel::V => dr * (e + dl),
        PathLabel::VI => -dr * (e + dl),
    };
    Ok(numerator / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSet {
    /// Paths I, II, III: the E_L - Delta_L electron enters first.
    A,
    /// Paths IV, V, VI.
    B,
}

impl PathSet {
    pub fn members(self) -> [PathLabel; 3] {
        match self {
            PathSet::A => [PathLabel::I, PathLabel::II, PathLabel::III],
            PathSet::B => [PathLabel::IV, PathLabel::V, PathLabel::VI],
        }
    }
}

/// Combined singlet of one set; the triplet part is `+tau` for A and `-tau`
/// for B, with `tau` the triplet coefficient of path I.
pub fn set_sum_closed_form(set: PathSet, p: &Params) -> Result<ClosedFormResult> {
    p.check_poles()?;
    let (e, dl, dr, u) = (p.e_l, p.delta_l, p.delta_r, p.u);
    let common = (dl * dl - dr * dr) * (e * e - dr * dr) * (2.0 * e - u);
    let singlet = match set {
        PathSet::A => (-u * (dr * dr - dl * e) - 2.0 * dl * e * (e - dl)) / ((e - dl) * common),
        PathSet::B => (-u * (dr * dr + dl * e) + 2.0 * dl * e * (e + dl)) / ((e + dl) * common),
    };
    let tau = path_closed_form(PathLabel::I, p)?.triplet0;
    Ok(ClosedFormResult {
        singlet,
        triplet0: match set {
            PathSet::A => tau,
            PathSet::B => -tau,
        },
    })
}

/// Total singlet coefficient `2 E_L U / ((E_L^2 - Delta_R^2)(E_L^2 - Delta_L^2)(2 E_L - U))`.
pub fn total_singlet_closed_form(p: &Params) -> Result<f64> {
    p.check_poles()?;
    let (e, dl, dr, u) = (p.e_l, p.delta_l, p.delta_r, p.u);
    Ok(2.0 * e * u / ((e * e - dr * dr) * (e * e - dl * dl) * (2.0 * e - u)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: residual {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn failures(&self) -> Vec<&IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

pub const IDENTITY_REL_TOL: f64 = 1e-12;

/// Mutual consistency of the per-path, per-set and total closed forms.
pub fn cross_check_identities(p: &Params) -> Result<IdentityReport> {
    let paths = PathLabel::ALL
        .iter()
        .map(|&l| path_closed_form(l, p))
        .collect::<Result<Vec<_>>>()?;
    let path_singlet: f64 = paths.iter().map(|r| r.singlet).sum();
    let path_triplet: f64 = paths.iter().map(|r| r.triplet0).sum();
    let a = set_sum_closed_form(PathSet::A, p)?;
    let b = set_sum_closed_form(PathSet::B, p)?;
    let total = total_singlet_closed_form(p)?;

    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
    let mut checks = vec![
        IdentityCheck {
            name: "sum of path singlets = closed-form total",
            residual: (path_singlet - total).abs(),
            tolerance: IDENTITY_REL_TOL * total.abs() + 1e-15,
        },
        IdentityCheck {
            name: "set A + set B singlet = closed-form total",
            residual: (a.singlet + b.singlet - total).abs(),
            tolerance: IDENTITY_REL_TOL * total.abs() + 1e-15,
        },
        IdentityCheck {
            name: "sum of path triplets = 0",
            residual: path_triplet.abs(),
            tolerance: IDENTITY_REL_TOL * paths.iter().map(|r| r.triplet0.abs()).fold(0.0, f64::max),
        },
    ];
    for set in [PathSet::A, PathSet::B] {
        let singlets = set
            .members()
            .iter()
            .map(|&l| path_closed_form(l, p).map(|r| r.singlet))
            .collect::<Result<Vec<f64>>>()?;
        let members: f64 = singlets.iter().sum();
        // members can cancel; compare on the scale of the largest one
        let scale = singlets.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let s = if set == PathSet::A { a.singlet } else { b.singlet };
        checks.push(IdentityCheck {
            name: if set == PathSet::A {
                "paths I+II+III singlet = set A"
            } else {
                "paths IV+V+VI singlet = set B"
            },
            residual: (members - s).abs(),
            tolerance: IDENTITY_REL_TOL * scale,
        });
    }
    let a0 = set_sum_closed_form(PathSet::A, &p.with_u(0.0))?;
    let b0 = set_sum_closed_form(PathSet::B, &p.with_u(0.0))?;
    checks.push(IdentityCheck {
        name: "U=0: set A singlet = -set B singlet",
        residual: rel(a0.singlet, -b0.singlet),
        tolerance: IDENTITY_REL_TOL,
    });
    Ok(IdentityReport { checks })
}
