//! Exact propagation of Gaussian wave-packet motional states under piecewise
//! quadratic Hamiltonians, with the inverse-design solvers for complex
//! linewidth control, a state-selective trigger-pulse compiler for a
//! spin (x) oscillator system, and independent brute-force oracles for
//! cross-validation.
//!
//! Layout:
//! - [`state`]: Gaussian states, overlaps, the Gaussian integral primitive
//! - [`propagator`]: quadratic propagators in classical-flow form
//! - [`evolve`]: closed-form Gaussian evolution and schedules
//! - [`design`]: linewidth design solvers
//! - [`trigger`]: spin (x) oscillator drives and pulse-program compilation
//! - [`oracle`]: split-step grid and truncated-Fock reference solvers

pub mod coef;
pub mod design;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod propagator;
pub mod oracle;
pub mod quad;
pub mod state;
pub mod trigger;

pub use coef::Coef;
pub use error::{Error, Result};
pub use evolve::{SnapshotRule, Trajectory};
pub use propagator::{
    inverse_free_sandwich, inverse_free_sandwich_branch, ForceSpec, KernelCoefficients,
    PulseSegment, QuadraticPropagator, SandwichSolution, SignBranch,
};
pub use state::{gaussian_integral, ComplexLinewidth, GaussianState};
pub use trigger::{
    FockRep, InternalLabel, InternalLevels, MatchedDrive, PulseOp, PulseProgram, QVariant,
    RamanPair, TrapParams, UiOrder,
};
