//! Independent brute-force solvers used to validate the analytic modules:
//! a split-step spectral grid propagator and a truncated-Fock dense solver,
//! plus Gaussian fitting and state comparison.
//!
//! Nothing in this module calls into [`crate::propagator`] or
//! [`crate::evolve`]; agreement between the two paths is evidence, not
//! tautology.

mod fit;
mod fock;
mod grid;

pub use fit::{compare, fit_gaussian, ComparisonReport, GaussianFit, ParamDeltas};
pub use fock::{
    fock_evolve, fock_evolve_checked, FockCoupling, FockHamiltonian, FockState, MotionalMoments,
};
pub use grid::{grid_evolve, GridCoupling, GridHamiltonian, GridSpec, GridState};
