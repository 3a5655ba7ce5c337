//! Two-electron co-tunneling through a single-level quantum dot coupled to
//! one input lead (L) and two output leads (R1, R2).
//!
//! - [`fock`]: fermionic Fock space on bitstrings.
//! - [`model`]: energy configuration, Anderson Hamiltonian, input state.
//! - [`perturbation`]: fourth-order resolvent engine over all vertex orderings.
//! - [`closedform`]: analytic path amplitudes and their identities.
//! - [`oracle`]: exact time evolution used as an independent reference.
//! - [`cli`]: the `cotunnel` command-line front end.

pub mod cli;
pub mod closedform;
pub mod error;
pub mod fock;
pub mod model;
pub mod oracle;
pub mod perturbation;

pub use closedform::{path_closed_form, total_singlet_closed_form, ClosedFormResult, Params};
pub use error::{Error, Result};
pub use fock::{FockState, Lead, Mode, ModeRegistry, Spin, StateVector};
pub use model::{validate_config, EnergyConfig, HamiltonianMatrix, SpinPair, Violation};
pub use oracle::{fit_quadratic_growth, transition_probabilities, EvolutionResult, QuadraticFit};
pub use perturbation::{path_amplitudes, total_output, PathLabel, SpinDecomposition};
