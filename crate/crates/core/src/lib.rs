//! Squeezing-assisted two-qubit gates for trapped ions.
//!
//! A gate is a drive on the first and second motional sidebands. Its
//! amplitudes are chosen so that the motion disentangles from the spins,
//! the accumulated spin-spin phase hits a target, and that phase is
//! insensitive to the Rabi frequency to first order. The crate designs such
//! drives, evaluates their fidelity under quasi-static errors in closed form,
//! and cross-checks everything against a truncated Fock-space simulation.
//!
//! Internally time is dimensionless, `τ = ξt ∈ [0, 2π]`, and drive
//! amplitudes are in units of ξ.

pub mod cli;
pub mod designer;
pub mod drive;
pub mod error;
pub mod fidelity;
pub mod functionals;
pub mod oracle;
pub mod quadrature;
pub mod tones;
pub mod trajectory;

pub use designer::{design_profile, rabi_estimate, refine_design, solve_expanded, GateDesign, RabiEstimate, SolverConfig};
pub use drive::{make_profile, DriveSpec, ErrorModel, Harmonic, Profile};
pub use error::{Error, Result};
pub use fidelity::{closed_form_fidelity, scan, scaling_exponent, ErrorAxis, FidelityResult, Method, ScanSettings, ScanTable};
pub use functionals::{constraint_residuals, phase_functionals, Branch, ConstraintResiduals, PhaseFunctionals, TARGET_PHASE};
pub use oracle::{numeric_fidelity, FockConfig};
pub use quadrature::QuadratureConfig;
pub use tones::{export_tones, RealizationParams, ToneList};
pub use trajectory::{compute_trajectory, TrajectoryPoint};
