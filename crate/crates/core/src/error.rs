use thiserror::Error;

/// Diagnostics attached to an infeasible linewidth target: the intermediate
/// solver quantities that show *why* no pulse pair can reach the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfeasibleDiagnostics {
    pub a0: f64,
    pub b0: f64,
    pub n_o_sq: f64,
    pub tan_omega_t: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Precondition violation on an input value.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural constraint between inputs is not satisfied.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// The requested linewidth target cannot be realized by any two-pulse
    /// parameter set (frequency ratio would be imaginary).
    #[error("infeasible target: n_o^2 = {} <= 0 (A0 = {}, B0 = {}, tan(omega T) = {})",
            .0.n_o_sq, .0.a0, .0.b0, .0.tan_omega_t)]
    InfeasibleTarget(InfeasibleDiagnostics),

    /// The solver geometry degenerates (indeterminate branch equations).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// No branch of the solver reproduced the target on re-verification.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// A harmonic segment sits exactly on a focal point where the kernel
    /// coefficient view does not exist.
    #[error("focal singularity: {0}")]
    FocalSingularity(String),

    /// The kernel coefficient view was requested for a propagator that has
    /// none (point-map flow).
    #[error("coefficient view unavailable: {0}")]
    ViewUnavailable(String),

    /// Quadrature or integration failed to reach the requested tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A brute-force representation is too small for the requested state.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// The wave packet reached the edge of the oracle grid.
    #[error("domain escape: {0}")]
    DomainEscape(String),

    /// The first-order effective model does not apply to these parameters.
    #[error("model domain: {0}")]
    ModelDomain(String),

    /// Internal consistency check failed (indicates a bug, not bad input).
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
