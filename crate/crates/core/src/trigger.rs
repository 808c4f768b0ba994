//! State-selective trigger pulses on a three-level atom in a harmonic trap.
//!
//! Internal levels are ordered `(g0, g1, e)` with
//! `I_z = (|e><e| - |g0><g0|)/2`, `I+ = |e><g0|`, `I- = |g0><e|`; the drive
//! touches only the `g0 <-> e` pair, so any `|g1>` product state is invariant
//! up to a global phase under every compiled program.
//!
//! The matched two-beam drive produces the dipole Hamiltonian
//!
//! ```text
//! H_I(alpha, gamma) = 2 hbar Omega0 [ I+ e^{i(k_sum x/2 - gamma)} + h.c. ]
//!                       cos(k_diff x/2 - alpha)
//! ```
//!
//! whose commutator at phases `gamma = 0, pi/2` is
//! `Q = i[H_I(a,0), H_I(a,pi/2)] = -16 hbar^2 Omega0^2 I_z cos^2(k_diff x/2 - a)`,
//! the generator of the internal-state-selective momentum kick. Programs are
//! compiled from three realizable primitives: trap evolution, trap evolution
//! over a period complement (an inverse up to phase), and the laser-on
//! segment. Operator exponentials on the truncated number basis use dense
//! exponentiation of `i k x`, which keeps the commutator algebra exact at
//! the truncation size.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::coef::Coef;
use crate::error::{Error, Result};
use crate::linalg;
use crate::oracle::{fit_gaussian, FockState, GridSpec};
use crate::propagator::{ForceSpec, QuadraticPropagator};
use crate::quad;
use crate::state::GaussianState;

/// Trap parameters shared by all trigger machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    pub mass: f64,
    pub hbar: f64,
    pub omega: f64,
}

impl TrapParams {
    pub fn ground_state(&self) -> Result<GaussianState> {
        GaussianState::trap_ground(self.mass, self.hbar, self.omega)
    }
}

/// Internal three-level structure `(g0, g1, e)` with energies `(E0, E1, E2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalLevels {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub hbar: f64,
}

impl InternalLevels {
    pub fn new(e0: f64, e1: f64, e2: f64, hbar: f64) -> Result<Self> {
        if e2 <= e0 {
            return Err(Error::Domain("internal levels need E2 > E0".into()));
        }
        Ok(InternalLevels { e0, e1, e2, hbar })
    }

    /// Resonance frequency of the driven pair.
    pub fn omega_a(&self) -> f64 {
        (self.e2 - self.e0) / self.hbar
    }

    pub fn alpha0(&self) -> f64 {
        0.5 * (self.e2 + self.e0)
    }

    pub fn i_z() -> [[f64; 3]; 3] {
        [[-0.5, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.5]]
    }
}

/// Indices into the `(g0, g1, e)` ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InternalLabel {
    G0,
    G1,
    E,
}

impl InternalLabel {
    pub fn index(&self) -> usize {
        match self {
            InternalLabel::G0 => 0,
            InternalLabel::G1 => 1,
            InternalLabel::E => 2,
        }
    }

    /// Eigenvalue of `I_z` on this level.
    pub fn iz(&self) -> f64 {
        match self {
            InternalLabel::G0 => -0.5,
            InternalLabel::G1 => 0.0,
            InternalLabel::E => 0.5,
        }
    }
}

/// Two Raman beams addressing `g0 <-> e`.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanPair {
    pub rabi0: Coef,
    pub rabi1: Coef,
    pub k0: f64,
    pub k1: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub phi0: f64,
    pub phi1: f64,
}

impl RamanPair {
    pub fn delta_k(&self) -> f64 {
        self.k0 - self.k1
    }

    pub fn delta_omega(&self) -> f64 {
        self.omega0 - self.omega1
    }

    pub fn delta_phi(&self) -> f64 {
        self.phi0 - self.phi1
    }

    /// Lamb-Dicke parameter `sqrt(hbar dk^2 / (2 m omega))` of the beat.
    pub fn lamb_dicke(&self, trap: &TrapParams) -> f64 {
        (trap.hbar * self.delta_k() * self.delta_k() / (2.0 * trap.mass * trap.omega)).sqrt()
    }

    /// True when `eta * amplitude_scale < 0.1`.
    pub fn lamb_dicke_regime(&self, trap: &TrapParams, amplitude_scale: f64) -> bool {
        self.lamb_dicke(trap) * amplitude_scale < 0.1
    }
}

/// Amplitude- and phase-matched drive: `Omega0 = Omega1`,
/// `phi0 = alpha + gamma`, `phi1 = (omega0 - omega1) t - alpha + gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedDrive {
    pub alpha: f64,
    pub gamma: f64,
    /// Constant Rabi amplitude `Omega0`.
    pub rabi: f64,
    pub k_sum: f64,
    pub k_diff: f64,
}

impl MatchedDrive {
    pub fn new(rabi: f64, k0: f64, k1: f64, alpha: f64, gamma: f64) -> Result<Self> {
        if !(rabi > 0.0) {
            return Err(Error::Domain(format!("rabi must be positive, got {rabi}")));
        }
        Ok(MatchedDrive { alpha, gamma, rabi, k_sum: k0 + k1, k_diff: k0 - k1 })
    }

    pub fn with_phases(&self, alpha: f64, gamma: f64) -> Self {
        MatchedDrive { alpha, gamma, ..*self }
    }
}

/// Truncated number-basis representation of the spin (x) oscillator space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockRep {
    pub n: usize,
    pub trap: TrapParams,
}

impl FockRep {
    pub fn new(n: usize, trap: TrapParams) -> Result<Self> {
        if n < 4 {
            return Err(Error::Domain(format!("Fock truncation too small: {n}")));
        }
        Ok(FockRep { n, trap })
    }

    /// Truncation heuristic for a target coherent amplitude: enough levels
    /// that the tail population stays below ~1e-12.
    pub fn for_kick(trap: TrapParams, coherent_amplitude: f64) -> Result<Self> {
        let a2 = coherent_amplitude * coherent_amplitude;
        let n = (a2 + 10.0 * coherent_amplitude.abs() + 20.0).ceil() as usize;
        FockRep::new(n, trap)
    }

    fn x_matrix(&self) -> Array2<C64> {
        let n = self.n;
        let x0 = (self.trap.hbar / (2.0 * self.trap.mass * self.trap.omega)).sqrt();
        let mut x: Array2<C64> = Array2::zeros((n, n));
        for k in 0..n - 1 {
            let v = x0 * ((k + 1) as f64).sqrt();
            x[(k, k + 1)] = C64::new(v, 0.0);
            x[(k + 1, k)] = C64::new(v, 0.0);
        }
        x
    }

    fn h0_phases(&self, t: f64) -> Vec<C64> {
        (0..self.n)
            .map(|k| C64::new(0.0, -self.trap.omega * (k as f64 + 0.5) * t).exp())
            .collect()
    }
}

fn embed(block: &Array2<C64>, row: usize, col: usize, n: usize, out: &mut Array2<C64>) {
    for i in 0..n {
        for j in 0..n {
            out[(row * n + i, col * n + j)] += block[(i, j)];
        }
    }
}

/// Motional factor `F = e^{-i gamma} e^{i k_sum x/2} cos(k_diff x/2 - alpha)`
/// of the matched dipole interaction.
fn drive_motional_factor(d: &MatchedDrive, rep: &FockRep) -> Result<Array2<C64>> {
    let x = rep.x_matrix();
    let es = linalg::expm(&x.mapv(|z| C64::new(0.0, 0.5 * d.k_sum) * z))?;
    let ed = linalg::expm(&x.mapv(|z| C64::new(0.0, 0.5 * d.k_diff) * z))?;
    let edd = linalg::dagger(&ed);
    let cos_op = (ed.mapv(|z| z * C64::new(0.0, -d.alpha).exp())
        + edd.mapv(|z| z * C64::new(0.0, d.alpha).exp()))
        / C64::new(2.0, 0.0);
    Ok(linalg::matmul(&es, &cos_op).mapv(|z| z * C64::new(0.0, -d.gamma).exp()))
}

/// Matched dipole Hamiltonian `H_I(alpha, gamma)` on the full
/// `(g0, g1, e) (x) Fock` space.
pub fn matched_dipole_h(d: &MatchedDrive, rep: &FockRep) -> Result<Array2<C64>> {
    let n = rep.n;
    let f = drive_motional_factor(d, rep)?;
    let mut h: Array2<C64> = Array2::zeros((3 * n, 3 * n));
    let scale = 2.0 * rep.trap.hbar * d.rabi;
    let up = f.mapv(|z| z * scale);
    embed(&up, 2, 0, n, &mut h); // I+ = |e><g0|
    let down = linalg::dagger(&up);
    embed(&down, 0, 2, n, &mut h);
    let defect = linalg::hermiticity_defect(&h);
    if defect > 1e-13 {
        return Err(Error::Internal(format!(
            "matched dipole assembly is not Hermitian (defect {defect:.3e})"
        )));
    }
    Ok(h)
}

/// Per-grid-point 3x3 blocks of the same interaction (diagonal in x).
pub fn matched_dipole_h_grid(d: &MatchedDrive, xs: &[f64], hbar: f64) -> Vec<[[C64; 3]; 3]> {
    xs.iter()
        .map(|&x| {
            let w = 2.0 * hbar * d.rabi * (0.5 * d.k_diff * x - d.alpha).cos()
                * C64::new(0.0, 0.5 * d.k_sum * x - d.gamma).exp();
            let z = C64::new(0.0, 0.0);
            [[z, z, w.conj()], [z, z, z], [w, z, z]]
        })
        .collect()
}

/// Full trap Hamiltonian on the product space (diagonal per level).
fn trap_h_full(rep: &FockRep) -> Array2<C64> {
    let n = rep.n;
    let mut h: Array2<C64> = Array2::zeros((3 * n, 3 * n));
    for l in 0..3 {
        for k in 0..n {
            h[(l * n + k, l * n + k)] =
                C64::new(rep.trap.hbar * rep.trap.omega * (k as f64 + 0.5), 0.0);
        }
    }
    h
}

/// Rotating-frame Hamiltonian `H0 + hbar (omega_a - omega_0) I_z +
/// H_I(alpha, gamma)`; at zero detuning this is the time-independent
/// on-resonance form.
pub fn rotating_frame_h(d: &MatchedDrive, rep: &FockRep, detuning: f64) -> Result<Array2<C64>> {
    let n = rep.n;
    let mut h = trap_h_full(rep);
    let hd = matched_dipole_h(d, rep)?;
    h = h + &hd;
    if detuning != 0.0 {
        for k in 0..n {
            h[(k, k)] -= C64::new(0.5 * rep.trap.hbar * detuning, 0.0);
            h[(2 * n + k, 2 * n + k)] += C64::new(0.5 * rep.trap.hbar * detuning, 0.0);
        }
    }
    Ok(h)
}

/// `Q = i [H_I(alpha, 0), H_I(alpha, pi/2)]`, verified against the closed
/// form `-16 hbar^2 Omega0^2 I_z cos^2(k_diff x/2 - alpha)`.
pub fn commutator_q(d: &MatchedDrive, rep: &FockRep) -> Result<Array2<C64>> {
    let h0 = matched_dipole_h(&d.with_phases(d.alpha, 0.0), rep)?;
    let h1 = matched_dipole_h(&d.with_phases(d.alpha, PI / 2.0), rep)?;
    let comm = linalg::matmul(&h0, &h1) - &linalg::matmul(&h1, &h0);
    let q = comm.mapv(|z| C64::new(0.0, 1.0) * z);
    let closed = commutator_q_closed_form(d, rep)?;
    let num = linalg::frobenius(&(&q - &closed));
    let den = linalg::frobenius(&closed).max(1e-300);
    if num / den > 1e-10 {
        return Err(Error::Numeric(format!(
            "commutator deviates from closed form by {:.3e} (truncation too small)",
            num / den
        )));
    }
    Ok(q)
}

/// Closed form of the commutation operator on the same truncated space.
pub fn commutator_q_closed_form(d: &MatchedDrive, rep: &FockRep) -> Result<Array2<C64>> {
    let n = rep.n;
    let x = rep.x_matrix();
    let ed = linalg::expm(&x.mapv(|z| C64::new(0.0, 0.5 * d.k_diff) * z))?;
    let edd = linalg::dagger(&ed);
    let cos_op = (ed.mapv(|z| z * C64::new(0.0, -d.alpha).exp())
        + edd.mapv(|z| z * C64::new(0.0, d.alpha).exp()))
        / C64::new(2.0, 0.0);
    let cos2 = linalg::matmul(&cos_op, &cos_op);
    let hbar = rep.trap.hbar;
    let s = -16.0 * hbar * hbar * d.rabi * d.rabi;
    let mut q: Array2<C64> = Array2::zeros((3 * n, 3 * n));
    let up = cos2.mapv(|z| z * (0.5 * s));
    let dn = cos2.mapv(|z| z * (-0.5 * s));
    embed(&up, 2, 2, n, &mut q);
    embed(&dn, 0, 0, n, &mut q);
    Ok(q)
}

/// One primitive of a pulse program. Programs list factors in
/// operator-product order: the *last* element acts first on the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseOp {
    /// Trap-only evolution `U_o(t)`.
    Trap { t: f64 },
    /// Inverse trap evolution, realizable as `U_o(2 k pi / omega - t)` up to
    /// a global phase; `k` is the minimal winding making the duration
    /// positive.
    TrapInverse { t: f64, k: u32 },
    /// Laser-on evolution `exp(-i (H0 + H_I(alpha, gamma)) t / hbar)`.
    /// Negative `t` marks the backward block of a Suzuki recursion.
    LaserOn { alpha: f64, gamma: f64, t: f64 },
    /// Dipole-only evolution `exp(-i H_I(alpha, gamma) t / hbar)`; abstract
    /// until lowered through [`compile_ui`]. Negative `t` denotes an
    /// unrewritten inverse factor.
    Drive { alpha: f64, gamma: f64, t: f64 },
}

/// An ordered pulse program with its declared approximation order: the
/// distance to the compiled target scales as `O(dt^error_exponent)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProgram {
    pub drive: MatchedDrive,
    pub ops: Vec<PulseOp>,
    pub error_exponent: u32,
}

impl PulseProgram {
    /// True when no factor is an abstract inverse (negative duration).
    /// Forward dipole factors count as realizable: each expands into basic
    /// segments through [`compile_ui`].
    pub fn is_realizable(&self) -> bool {
        self.ops.iter().all(|op| match op {
            PulseOp::Trap { t }
            | PulseOp::TrapInverse { t, .. }
            | PulseOp::LaserOn { t, .. }
            | PulseOp::Drive { t, .. } => *t >= 0.0,
        })
    }

    /// Wall-clock duration of the physical realization (inverse trap ops
    /// expand to their period complements).
    pub fn realization_duration(&self, omega: f64) -> f64 {
        self.ops
            .iter()
            .map(|op| match op {
                PulseOp::Trap { t } => t.abs(),
                PulseOp::TrapInverse { t, k } => 2.0 * PI * *k as f64 / omega - t,
                PulseOp::LaserOn { t, .. } => t.abs(),
                PulseOp::Drive { t, .. } => t.abs(),
            })
            .sum()
    }

    /// Concatenate `self` repeated `reps` times (product of `reps` blocks).
    pub fn repeated(&self, reps: usize) -> PulseProgram {
        let mut ops = Vec::with_capacity(self.ops.len() * reps);
        for _ in 0..reps {
            ops.extend(self.ops.iter().copied());
        }
        PulseProgram { drive: self.drive, ops, error_exponent: self.error_exponent }
    }
}

fn min_winding(t: f64, omega: f64) -> u32 {
    (t * omega / (2.0 * PI)).floor() as u32 + 1
}

/// Composition scheme for realizing the dipole propagator from the basic
/// segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UiOrder {
    /// `U_o^+(dt) U_I(dt)`: error `O(dt^2)`.
    First,
    /// Symmetric `U_o^+(dt/2) U_I(dt) U_o^+(dt/2)`: error `O(dt^3)`.
    Symmetric,
    /// Recursive symmetric composition of order `2n+1` (`n >= 2`) with
    /// `p_n = (4 - 4^{1/(2n-1)})^{-1}`. The middle block runs backward, so
    /// these are certification targets rather than directly realizable
    /// sequences.
    Suzuki { n: u32 },
}

/// Compile one dipole propagator `U_I(alpha, gamma, dt)` into basic ops.
pub fn compile_ui(d: &MatchedDrive, dt: f64, order: UiOrder, omega: f64) -> Result<PulseProgram> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    let (ops, exponent) = match order {
        UiOrder::First => (
            vec![
                trap_inverse_op(dt, omega),
                PulseOp::LaserOn { alpha: d.alpha, gamma: d.gamma, t: dt },
            ],
            2,
        ),
        UiOrder::Symmetric => (symmetric_ops(d, dt, omega), 3),
        UiOrder::Suzuki { n } => {
            if n < 2 {
                return Err(Error::Domain("Suzuki order parameter needs n >= 2".into()));
            }
            (suzuki_ops(d, dt, omega, n), 2 * n + 1)
        }
    };
    Ok(PulseProgram { drive: *d, ops, error_exponent: exponent })
}

fn trap_inverse_op(t: f64, omega: f64) -> PulseOp {
    if t >= 0.0 {
        PulseOp::TrapInverse { t, k: min_winding(t, omega) }
    } else {
        PulseOp::Trap { t: -t }
    }
}

fn symmetric_ops(d: &MatchedDrive, dt: f64, omega: f64) -> Vec<PulseOp> {
    vec![
        trap_inverse_op(dt / 2.0, omega),
        PulseOp::LaserOn { alpha: d.alpha, gamma: d.gamma, t: dt },
        trap_inverse_op(dt / 2.0, omega),
    ]
}

fn suzuki_ops(d: &MatchedDrive, dt: f64, omega: f64, n: u32) -> Vec<PulseOp> {
    if n == 1 {
        return symmetric_ops(d, dt, omega);
    }
    let p = 1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * n as f64 - 1.0)));
    let outer = suzuki_ops(d, p * dt, omega, n - 1);
    let middle = suzuki_ops(d, (1.0 - 4.0 * p) * dt, omega, n - 1);
    let mut ops = Vec::with_capacity(4 * outer.len() + middle.len());
    ops.extend(outer.iter().copied());
    ops.extend(outer.iter().copied());
    ops.extend(middle);
    ops.extend(outer.iter().copied());
    ops.extend(outer.iter().copied());
    ops
}

/// Variant of the commutator sequence approximating `exp(i Q (dt/hbar)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QVariant {
    /// Four-factor group commutator, abstract inverses: error `O(dt^3)`.
    Basic,
    /// Eight-factor sequence at `dt/sqrt(2)`, abstract inverses: `O(dt^4)`.
    Improved,
    /// The eight-factor sequence with every inverse rewritten as a
    /// `gamma + pi` drive: `O(dt^4)`, no abstract factors.
    Realizable,
}

/// Compile the kick generator `exp(i Q (dt/hbar)^2)` at the drive's `alpha`.
pub fn compile_q_sequence(d: &MatchedDrive, dt: f64, variant: QVariant) -> Result<PulseProgram> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let a = d.alpha;
    let drv = |gamma: f64, t: f64| PulseOp::Drive { alpha: a, gamma, t };
    let (ops, exponent) = match variant {
        QVariant::Basic => (
            vec![drv(0.0, dt), drv(PI / 2.0, dt), drv(0.0, -dt), drv(PI / 2.0, -dt)],
            3,
        ),
        QVariant::Improved => {
            let tau = dt / 2f64.sqrt();
            (
                vec![
                    drv(0.0, tau),
                    drv(PI / 2.0, tau),
                    drv(0.0, -tau),
                    drv(PI / 2.0, -tau),
                    drv(0.0, -tau),
                    drv(PI / 2.0, -tau),
                    drv(0.0, tau),
                    drv(PI / 2.0, tau),
                ],
                4,
            )
        }
        QVariant::Realizable => {
            let tau = dt / 2f64.sqrt();
            (
                vec![
                    drv(0.0, tau),
                    drv(PI / 2.0, tau),
                    drv(PI, tau),
                    drv(3.0 * PI / 2.0, tau),
                    drv(PI, tau),
                    drv(3.0 * PI / 2.0, tau),
                    drv(0.0, tau),
                    drv(PI / 2.0, tau),
                ],
                4,
            )
        }
    };
    Ok(PulseProgram { drive: *d, ops, error_exponent: exponent })
}

/// Internal-state rotation `R_z(theta) = exp(-i theta I_z)` with
/// `theta = 16 Omega0^2 dt^2`, compiled at `alpha = 0`.
pub fn rotation_rz(d: &MatchedDrive, dt: f64) -> Result<PulseProgram> {
    if d.alpha != 0.0 {
        return Err(Error::Domain(format!(
            "rotation compilation requires alpha = 0, got {}",
            d.alpha
        )));
    }
    compile_q_sequence(d, dt, QVariant::Realizable)
}

/// Rotation angle generated by [`rotation_rz`].
pub fn rotation_angle(d: &MatchedDrive, dt: f64) -> f64 {
    16.0 * d.rabi * d.rabi * dt * dt
}

/// Momentum kick `hbar 4 Omega0^2 dk dt^2` imparted to the `g0` branch (the
/// `e` branch receives the opposite sign).
pub fn predicted_kick(d: &MatchedDrive, dt: f64, hbar: f64) -> f64 {
    hbar * 4.0 * d.rabi * d.rabi * d.k_diff * dt * dt
}

/// Mean motional energy `p0^2 / 2m` gained by a kicked rest packet.
pub fn predicted_kick_energy(d: &MatchedDrive, dt: f64, trap: &TrapParams) -> f64 {
    let p = predicted_kick(d, dt, trap.hbar);
    p * p / (2.0 * trap.mass)
}

/// Dense unitary of one program op on the full product space.
fn op_unitary(op: &PulseOp, d: &MatchedDrive, rep: &FockRep) -> Result<Array2<C64>> {
    let n = rep.n;
    let dim = 3 * n;
    match *op {
        PulseOp::Trap { t } => {
            let ph = rep.h0_phases(t);
            let mut u: Array2<C64> = Array2::zeros((dim, dim));
            for l in 0..3 {
                for k in 0..n {
                    u[(l * n + k, l * n + k)] = ph[k];
                }
            }
            Ok(u)
        }
        PulseOp::TrapInverse { t, .. } => {
            let ph = rep.h0_phases(-t);
            let mut u: Array2<C64> = Array2::zeros((dim, dim));
            for l in 0..3 {
                for k in 0..n {
                    u[(l * n + k, l * n + k)] = ph[k];
                }
            }
            Ok(u)
        }
        PulseOp::LaserOn { alpha, gamma, t } => {
            let h = rotating_frame_h(&d.with_phases(alpha, gamma), rep, 0.0)?;
            let a = h.mapv(|z| C64::new(0.0, -t / rep.trap.hbar) * z);
            linalg::expm(&a)
        }
        PulseOp::Drive { alpha, gamma, t } => {
            let h = matched_dipole_h(&d.with_phases(alpha, gamma), rep)?;
            let a = h.mapv(|z| C64::new(0.0, -t / rep.trap.hbar) * z);
            linalg::expm(&a)
        }
    }
}

/// Dense unitary of the whole program (ops in product order).
pub fn program_unitary(prog: &PulseProgram, rep: &FockRep) -> Result<Array2<C64>> {
    let dim = 3 * rep.n;
    let mut cache: Vec<(PulseOp, Array2<C64>)> = Vec::new();
    let mut u = linalg::identity(dim);
    for op in &prog.ops {
        let found = cache.iter().find(|(k, _)| k == op).map(|(_, v)| v.clone());
        let m = match found {
            Some(m) => m,
            None => {
                let m = op_unitary(op, &prog.drive, rep)?;
                cache.push((*op, m.clone()));
                m
            }
        };
        u = linalg::matmul(&u, &m);
    }
    Ok(u)
}

/// Ideal target of a single dipole factor.
pub fn ideal_drive_unitary(
    d: &MatchedDrive,
    gamma: f64,
    t: f64,
    rep: &FockRep,
) -> Result<Array2<C64>> {
    op_unitary(&PulseOp::Drive { alpha: d.alpha, gamma, t }, d, rep)
}

/// Ideal kick target `exp(i Q (dt/hbar)^2)`.
pub fn ideal_q_unitary(d: &MatchedDrive, dt: f64, rep: &FockRep) -> Result<Array2<C64>> {
    let q = commutator_q(d, rep)?;
    let c = (dt / rep.trap.hbar).powi(2);
    linalg::expm(&q.mapv(|z| C64::new(0.0, c) * z))
}

/// Outcome of running a trigger program on one product state.
#[derive(Debug, Clone)]
pub struct TriggerOutcome {
    pub final_state: FockState,
    /// Populations of `(g0, g1, e)`.
    pub populations: [f64; 3],
    /// `|<initial|final>|`, insensitive to global phase.
    pub fidelity_to_initial: f64,
    /// Gaussian fitted to the motional state of the initial internal level.
    pub fitted: GaussianState,
    pub fit_residual: f64,
    /// Mean energy of the fitted packet center above the trap zero point.
    pub center_energy: f64,
}

/// Run a compiled program on `(label, motional)` in the given representation.
pub fn apply_trigger(
    prog: &PulseProgram,
    label: InternalLabel,
    motional: &GaussianState,
    rep: &FockRep,
) -> Result<TriggerOutcome> {
    let trap = rep.trap;
    if motional.mass() != trap.mass || motional.hbar() != trap.hbar {
        return Err(Error::Domain("motional state disagrees with trap units".into()));
    }
    let psi0 = FockState::from_gaussian(motional, trap.omega, rep.n, label.index(), 3)?;
    if psi0.tail_population() > 1e-12 {
        return Err(Error::Resolution(format!(
            "initial truncation tail {:.3e} exceeds 1e-12",
            psi0.tail_population()
        )));
    }
    let u = program_unitary(prog, rep)?;
    let vec0: Vec<C64> = psi0.amps.iter().flatten().copied().collect();
    let n = rep.n;
    let mut vec = vec![C64::new(0.0, 0.0); 3 * n];
    for (i, vi) in vec.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (j, vj) in vec0.iter().enumerate() {
            acc += u[(i, j)] * vj;
        }
        *vi = acc;
    }
    let amps: Vec<Vec<C64>> = (0..3).map(|l| vec[l * n..(l + 1) * n].to_vec()).collect();
    let fin = FockState { mass: trap.mass, hbar: trap.hbar, omega: trap.omega, amps };
    let populations = [
        fin.level_population(0),
        fin.level_population(1),
        fin.level_population(2),
    ];
    let fidelity_to_initial = fin.inner(&psi0)?.norm();

    // fit the motional packet on the initial internal level
    let idx = label.index();
    let mom = fin.moments(idx);
    let spread_guess = mom.var_x.sqrt();
    let half = 8.0 * spread_guess + mom.x.abs() + 1.0;
    let npts = 1024usize;
    let spec = GridSpec::new(-half, half, npts)?;
    let mut level_state = fin.clone();
    // isolate and renormalize the branch before fitting
    let popl = level_state.level_population(idx).max(1e-300).sqrt();
    for l in 0..3 {
        if l != idx {
            for z in &mut level_state.amps[l] {
                *z = C64::new(0.0, 0.0);
            }
        } else {
            for z in &mut level_state.amps[l] {
                *z /= popl;
            }
        }
    }
    let on_grid = level_state.to_grid(spec, idx);
    let fit = fit_gaussian(&on_grid, 0)?;
    let fitted = fit.state.clone();
    let center_energy = fitted.mean_momentum().powi(2) / (2.0 * trap.mass)
        + 0.5 * trap.mass * trap.omega.powi(2) * fitted.x_center().powi(2);
    Ok(TriggerOutcome {
        final_state: fin,
        populations,
        fidelity_to_initial,
        fitted,
        fit_residual: fit.residual,
        center_energy,
    })
}

/// First-order effective parameters of an off-resonance Raman drive.
#[derive(Debug, Clone)]
pub struct EffectiveParams {
    /// `Omega_eff(t_end) = 2 k0 O0 O1/(wa - w1) - 2 k1 O0 O1/(wa - w0)`.
    pub omega_eff: f64,
    /// Shifted internal frequency `Omega_a(t_end)`.
    pub omega_a_eff: f64,
    /// `Omega_el = 2 O0 O1 / (wa - wl)`.
    pub omega_e0: f64,
    pub omega_e1: f64,
    /// `beta(t_end)` (integral term plus boundary term).
    pub beta: C64,
    /// `beta` sampled uniformly on `[0, t_end]`.
    pub beta_curve: Vec<(f64, C64)>,
    /// Effective force `sqrt(2 m hbar omega) Re beta(t_end)`.
    pub force: f64,
    /// `max |Im beta| / max |beta|` over the curve.
    pub imag_fraction: f64,
    /// Largest `Omega_l / |wa - wl|`: size of the neglected nonsecular part.
    pub nonsecular_ratio: f64,
}

/// Evaluate the effective parameters at time `t` (curve sampled on `[0, t]`).
pub fn effective_params(
    pair: &RamanPair,
    levels: &InternalLevels,
    trap: &TrapParams,
    t: f64,
    quad_tol: f64,
) -> Result<EffectiveParams> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let wa = levels.omega_a();
    let d0 = wa - pair.omega0;
    let d1 = wa - pair.omega1;
    if d0.abs() < 1e-12 * wa.abs().max(1.0) || d1.abs() < 1e-12 * wa.abs().max(1.0) {
        return Err(Error::Domain(
            "zero detuning makes the first-order parameters singular".into(),
        ));
    }
    let omega = trap.omega;
    let dw = pair.delta_omega();
    let dphi = pair.delta_phi();
    let dk = pair.delta_k();
    let o0 = |u: f64| pair.rabi0.eval(u);
    let o1 = |u: f64| pair.rabi1.eval(u);
    let omega_eff_at =
        |u: f64| 2.0 * pair.k0 * o0(u) * o1(u) / d1 - 2.0 * pair.k1 * o0(u) * o1(u) / d0;
    let oe0_at = |u: f64| 2.0 * o0(u) * o1(u) / d0;
    let oe1_at = |u: f64| 2.0 * o0(u) * o1(u) / d1;
    let pref_int = C64::new(0.0, -1.0) * (2.0 * trap.hbar * omega / trap.mass).sqrt();
    let pref_bnd = dk * (2.0 * trap.hbar / (trap.mass * omega)).sqrt();
    let integrand = |u: f64| {
        C64::new(0.0, omega * u).exp() * (omega_eff_at(u) * (dw * u + dphi).sin())
    };
    let beta_at = |u: f64, integral: C64| {
        pref_int * integral
            + pref_bnd
                * (oe0_at(u) + oe1_at(u))
                * (dw * u + dphi).sin()
                * C64::new(0.0, omega * u).exp()
    };

    // endpoint by adaptive quadrature
    let int_end = quad::integrate_complex(integrand, 0.0, t, quad_tol)?;
    let beta_end = beta_at(t, int_end);

    // curve by cumulative composite Simpson on a fine uniform grid
    let periods = (t * (omega.abs().max(dw.abs()) / (2.0 * PI))).ceil().max(1.0);
    let n_curve = ((periods * 256.0) as usize).clamp(512, 1 << 17);
    let n_curve = n_curve + n_curve % 2; // even panel count
    let h = t / n_curve as f64;
    let mut curve = Vec::with_capacity(n_curve / 2 + 1);
    let mut acc = C64::new(0.0, 0.0);
    let mut prev = integrand(0.0);
    curve.push((0.0, beta_at(0.0, acc)));
    for i in 0..n_curve / 2 {
        let u_mid = (2 * i + 1) as f64 * h;
        let u_end = (2 * i + 2) as f64 * h;
        let f_mid = integrand(u_mid);
        let f_end = integrand(u_end);
        acc += (prev + f_mid * 4.0 + f_end) * (h / 3.0);
        prev = f_end;
        curve.push((u_end, beta_at(u_end, acc)));
    }
    if (acc - int_end).norm() > 1e-6 * int_end.norm().max(1.0) {
        return Err(Error::Numeric(format!(
            "beta curve integration disagrees with adaptive endpoint by {:.3e}",
            (acc - int_end).norm()
        )));
    }
    let max_b = curve.iter().map(|(_, b)| b.norm()).fold(0.0, f64::max);
    let max_im = curve.iter().map(|(_, b)| b.im.abs()).fold(0.0, f64::max);
    let omega_a_eff = wa
        + 4.0 * o0(t) * o0(t) / d0
        + 4.0 * o1(t) * o1(t) / d1
        + 2.0 * (oe0_at(t) + oe1_at(t)) * (dw * t + dphi).cos();
    let max_rabi = (0..=64)
        .map(|i| {
            let u = t * i as f64 / 64.0;
            o0(u).abs().max(o1(u).abs())
        })
        .fold(0.0, f64::max);
    Ok(EffectiveParams {
        omega_eff: omega_eff_at(t),
        omega_a_eff,
        omega_e0: oe0_at(t),
        omega_e1: oe1_at(t),
        beta: beta_end,
        beta_curve: curve,
        force: (2.0 * trap.mass * trap.hbar * omega).sqrt() * beta_end.re,
        imag_fraction: if max_b > 0.0 { max_im / max_b } else { 0.0 },
        nonsecular_ratio: (max_rabi / d0.abs()).max(max_rabi / d1.abs()),
    })
}

/// Predict the motional state after time `t` from the first-order effective
/// forced-oscillator model: branch `g0` evolves under `H0 - f(t) x / 2`,
/// branch `e` under `H0 + f(t) x / 2`, with
/// `f(t) = sqrt(2 m hbar omega) Re beta(t)`.
pub fn effective_forced_prediction(
    params: &EffectiveParams,
    trap: &TrapParams,
    branch: InternalLabel,
    t: f64,
    s0: &GaussianState,
    imag_tolerance: f64,
) -> Result<GaussianState> {
    let sign = match branch {
        InternalLabel::G0 => -0.5,
        InternalLabel::E => 0.5,
        InternalLabel::G1 => {
            return Err(Error::Domain(
                "g1 is not driven; the effective force acts only on g0 and e".into(),
            ))
        }
    };
    if params.imag_fraction > imag_tolerance {
        return Err(Error::ModelDomain(format!(
            "Im(beta) fraction {:.3e} exceeds tolerance {imag_tolerance:.3e}; \
             the real-force model does not apply",
            params.imag_fraction
        )));
    }
    let t_end = params.beta_curve.last().map(|(u, _)| *u).unwrap_or(0.0);
    if t > t_end * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "prediction time {t} exceeds the sampled beta curve end {t_end}"
        )));
    }
    let scale = (2.0 * trap.mass * trap.hbar * trap.omega).sqrt();
    let times: Vec<f64> = params.beta_curve.iter().map(|(u, _)| *u).collect();
    let values: Vec<f64> = params
        .beta_curve
        .iter()
        .map(|(_, b)| sign * scale * b.re)
        .collect();
    let force = ForceSpec { shape: Coef::Table { times, values }, quad_tol: 1e-10 };
    let g = QuadraticPropagator::forced_harmonic(trap.omega, &force, t, trap.mass, trap.hbar)?;
    crate::evolve::apply(&g, s0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trap() -> TrapParams {
        TrapParams { mass: 1.0, hbar: 1.0, omega: 1.0 }
    }

    fn drive() -> MatchedDrive {
        MatchedDrive::new(0.4, 0.7, -0.3, PI / 4.0, 0.0).unwrap()
    }

    fn rep(n: usize) -> FockRep {
        FockRep::new(n, trap()).unwrap()
    }

    #[test]
    fn dipole_is_hermitian_and_leaves_g1_alone() {
        let r = rep(16);
        let h = matched_dipole_h(&drive(), &r).unwrap();
        assert!(linalg::hermiticity_defect(&h) < 1e-14);
        // g1 rows and columns vanish
        let n = r.n;
        for i in 0..3 * n {
            for j in n..2 * n {
                assert_eq!(h[(i, j)], C64::new(0.0, 0.0));
                assert_eq!(h[(j, i)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn gamma_shift_by_pi_flips_sign() {
        let r = rep(12);
        let d = drive();
        let h0 = matched_dipole_h(&d.with_phases(d.alpha, 0.0), &r).unwrap();
        let hpi = matched_dipole_h(&d.with_phases(d.alpha, PI), &r).unwrap();
        let sum = &h0 + &hpi;
        assert!(linalg::frobenius(&sum) < 1e-12 * linalg::frobenius(&h0));
    }

    #[test]
    fn grid_and_fock_assemblies_agree_in_form() {
        let d = drive();
        let xs = [-0.4, 0.0, 1.3];
        let blocks = matched_dipole_h_grid(&d, &xs, 1.0);
        for (bl, &x) in blocks.iter().zip(&xs) {
            let w = 2.0 * d.rabi * (0.5 * d.k_diff * x - d.alpha).cos()
                * C64::new(0.0, 0.5 * d.k_sum * x - d.gamma).exp();
            assert!((bl[2][0] - w).norm() < 1e-15);
            assert!((bl[0][2] - w.conj()).norm() < 1e-15);
            assert_eq!(bl[1][1], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn commutator_matches_closed_form() {
        let r = rep(30);
        let q = commutator_q(&drive(), &r).unwrap();
        let c = commutator_q_closed_form(&drive(), &r).unwrap();
        let rel = linalg::frobenius(&(&q - &c)) / linalg::frobenius(&c);
        assert!(rel < 1e-12, "rel {rel}");
    }

    #[test]
    fn rotating_frame_reduces_to_on_resonance_form() {
        let r = rep(10);
        let d = drive();
        let h = rotating_frame_h(&d, &r, 0.0).unwrap();
        let expect = trap_h_full(&r) + &matched_dipole_h(&d, &r).unwrap();
        assert!(linalg::frobenius(&(&h - &expect)) < 1e-13);
        // drive off: block-diagonal oscillator plus detuning shift
        let weak = MatchedDrive { rabi: 1e-300, ..d };
        let h = rotating_frame_h(&weak, &r, 0.5).unwrap();
        let n = r.n;
        assert!((h[(0, 0)] - C64::new(0.5 - 0.25, 0.0)).norm() < 1e-12);
        assert!((h[(2 * n, 2 * n)] - C64::new(0.5 + 0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn g1_expectation_is_trap_energy_only() {
        let r = rep(12);
        let h = rotating_frame_h(&drive(), &r, 0.0).unwrap();
        // |psi0>|g1>: index block 1, Fock 0
        let n = r.n;
        let idx = n;
        assert!((h[(idx, idx)] - C64::new(0.5, 0.0)).norm() < 1e-13);
        for j in 0..3 * n {
            if j != idx {
                assert!(h[(idx, j)].norm() < 1e-15, "leakage at {j}");
            }
        }
    }

    #[test]
    fn compile_ui_shapes() {
        let d = drive();
        let p1 = compile_ui(&d, 0.1, UiOrder::First, 1.0).unwrap();
        assert_eq!(p1.ops.len(), 2);
        assert_eq!(p1.error_exponent, 2);
        assert!(matches!(p1.ops[0], PulseOp::TrapInverse { .. }));
        assert!(matches!(p1.ops[1], PulseOp::LaserOn { .. }));
        let p2 = compile_ui(&d, 0.1, UiOrder::Symmetric, 1.0).unwrap();
        assert_eq!(p2.ops.len(), 3);
        assert_eq!(p2.error_exponent, 3);
        let p3 = compile_ui(&d, 0.1, UiOrder::Suzuki { n: 2 }, 1.0).unwrap();
        assert_eq!(p3.ops.len(), 15);
        assert_eq!(p3.error_exponent, 5);
        // p_2 = (4 - 4^{1/3})^{-1}
        let p = 1.0 / (4.0 - 4f64.powf(1.0 / 3.0));
        assert!((p - 0.4144907717943757).abs() < 1e-15);
        if let PulseOp::LaserOn { t, .. } = p3.ops[1] {
            assert!((t - p * 0.1).abs() < 1e-15);
        } else {
            panic!("unexpected op layout");
        }
    }

    #[test]
    fn q_sequence_shapes() {
        let d = drive();
        let b = compile_q_sequence(&d, 0.2, QVariant::Basic).unwrap();
        assert_eq!(b.ops.len(), 4);
        assert_eq!(b.error_exponent, 3);
        assert!(!b.is_realizable()); // abstract inverses
        let r = compile_q_sequence(&d, 0.2, QVariant::Realizable).unwrap();
        assert_eq!(r.ops.len(), 8);
        assert_eq!(r.error_exponent, 4);
        assert!(r.is_realizable());
        let gammas: Vec<f64> = r
            .ops
            .iter()
            .map(|op| match op {
                PulseOp::Drive { gamma, .. } => *gamma,
                _ => panic!("non-drive op"),
            })
            .collect();
        assert_eq!(
            gammas,
            vec![
                0.0,
                PI / 2.0,
                PI,
                3.0 * PI / 2.0,
                PI,
                3.0 * PI / 2.0,
                0.0,
                PI / 2.0
            ]
        );
        // improved and realizable evaluate to the same unitary
        let rp = rep(14);
        let im = compile_q_sequence(&d, 0.2, QVariant::Improved).unwrap();
        let ui = program_unitary(&im, &rp).unwrap();
        let ur = program_unitary(&r, &rp).unwrap();
        assert!(linalg::frobenius(&(&ui - &ur)) < 1e-11);
    }

    #[test]
    fn drive_inverse_identity() {
        // Drive(a, g, t) Drive(a, g + pi, t) = 1 on the truncated space
        let d = drive();
        let rp = rep(16);
        let prog = PulseProgram {
            drive: d,
            ops: vec![
                PulseOp::Drive { alpha: d.alpha, gamma: 0.3, t: 0.4 },
                PulseOp::Drive { alpha: d.alpha, gamma: 0.3 + PI, t: 0.4 },
            ],
            error_exponent: 0,
        };
        let u = program_unitary(&prog, &rp).unwrap();
        let defect = linalg::frobenius(&(&u - &linalg::identity(3 * rp.n)));
        assert!(defect < 1e-12, "defect {defect}");
    }

    #[test]
    fn rz_requires_alpha_zero() {
        let d = drive();
        assert!(rotation_rz(&d, 0.1).is_err());
        let d0 = MatchedDrive::new(0.25, 0.7, -0.3, 0.0, 0.0).unwrap();
        let prog = rotation_rz(&d0, 1.0).unwrap();
        assert!((rotation_angle(&d0, 1.0) - 1.0).abs() < 1e-15);
        assert!(prog.is_realizable());
    }

    #[test]
    fn kick_formula_reference_value() {
        let d = MatchedDrive::new(0.1, 1.0, 0.0, PI / 4.0, 0.0).unwrap();
        assert!((predicted_kick(&d, 1.0, 1.0) - 0.04).abs() < 1e-15);
        let t = trap();
        assert!((predicted_kick_energy(&d, 1.0, &t) - 0.0008).abs() < 1e-18);
    }

    #[test]
    fn effective_params_zero_drive() {
        let pair = RamanPair {
            rabi0: Coef::Zero,
            rabi1: Coef::Zero,
            k0: 1.0,
            k1: 0.8,
            omega0: 99.0,
            omega1: 98.0,
            phi0: 0.0,
            phi1: 0.0,
        };
        let lv = InternalLevels::new(0.0, 0.3, 100.0, 1.0).unwrap();
        let p = effective_params(&pair, &lv, &trap(), 2.0, 1e-11).unwrap();
        assert_eq!(p.omega_eff, 0.0);
        assert!(p.beta.norm() < 1e-14);
        assert!((p.omega_a_eff - 100.0).abs() < 1e-12);
    }

    #[test]
    fn effective_params_rejects_zero_detuning() {
        let pair = RamanPair {
            rabi0: Coef::Const(0.1),
            rabi1: Coef::Const(0.1),
            k0: 1.0,
            k1: 0.8,
            omega0: 100.0,
            omega1: 99.0,
            phi0: 0.0,
            phi1: 0.0,
        };
        let lv = InternalLevels::new(0.0, 0.3, 100.0, 1.0).unwrap();
        assert!(effective_params(&pair, &lv, &trap(), 1.0, 1e-11).is_err());
    }

    #[test]
    fn resonant_beat_grows_secularly() {
        // dw = omega, dphi = -pi/2 makes the integrand's secular part real
        let lv = InternalLevels::new(0.0, 0.3, 100.0, 1.0).unwrap();
        let pair = RamanPair {
            rabi0: Coef::Const(1.0),
            rabi1: Coef::Const(1.0),
            k0: 1.0,
            k1: 0.8,
            omega0: 75.5,
            omega1: 74.5,
            phi0: -PI / 2.0,
            phi1: 0.0,
        };
        let t1 = 4.0 * PI;
        let t2 = 8.0 * PI;
        let p1 = effective_params(&pair, &lv, &trap(), t1, 1e-11).unwrap();
        let p2 = effective_params(&pair, &lv, &trap(), t2, 1e-11).unwrap();
        let ratio = p2.beta.norm() / p1.beta.norm();
        assert!(ratio > 1.8 && ratio < 2.2, "secular growth ratio {ratio}");
    }

    #[test]
    fn opposite_detunings_enhance_omega_eff() {
        let lv = InternalLevels::new(0.0, 0.3, 100.0, 1.0).unwrap();
        let same = RamanPair {
            rabi0: Coef::Const(0.5),
            rabi1: Coef::Const(0.5),
            k0: 1.0,
            k1: 0.8,
            omega0: 75.5,
            omega1: 74.5,
            phi0: 0.0,
            phi1: 0.0,
        };
        // opposite-sign detunings: wa - w0 = -0.5, wa - w1 = +0.5
        let opp = RamanPair { omega0: 100.5, omega1: 99.5, ..same.clone() };
        let ps = effective_params(&same, &lv, &trap(), 1.0, 1e-11).unwrap();
        let po = effective_params(&opp, &lv, &trap(), 1.0, 1e-11).unwrap();
        assert!(po.omega_eff.abs() > 10.0 * ps.omega_eff.abs());
    }

    #[test]
    fn prediction_zero_force_is_pure_harmonic() {
        let lv = InternalLevels::new(0.0, 0.3, 100.0, 1.0).unwrap();
        let pair = RamanPair {
            rabi0: Coef::Zero,
            rabi1: Coef::Zero,
            k0: 1.0,
            k1: 0.8,
            omega0: 75.5,
            omega1: 74.5,
            phi0: 0.0,
            phi1: 0.0,
        };
        let tp = trap();
        let p = effective_params(&pair, &lv, &tp, 1.3, 1e-11).unwrap();
        let s0 = tp.ground_state().unwrap();
        let out =
            effective_forced_prediction(&p, &tp, InternalLabel::G0, 1.3, &s0, 0.3).unwrap();
        // trap ground state is stationary
        assert!(out.approx_eq_up_to_phase(&s0, 1e-10));
    }

    #[test]
    fn prediction_branches_mirror() {
        // dphi = 0 puts the secular beta growth in the real part, where the
        // real-force model applies
        let lv = InternalLevels::new(0.0, 0.3, 100.0, 1.0).unwrap();
        let pair = RamanPair {
            rabi0: Coef::Const(1.0),
            rabi1: Coef::Const(1.0),
            k0: 1.0,
            k1: 0.8,
            omega0: 75.5,
            omega1: 74.5,
            phi0: 0.0,
            phi1: 0.0,
        };
        let tp = trap();
        let t = 3.6 * PI;
        let p = effective_params(&pair, &lv, &tp, t, 1e-11).unwrap();
        assert!(p.imag_fraction < 0.5, "imag fraction {}", p.imag_fraction);
        let s0 = tp.ground_state().unwrap();
        let g0 = effective_forced_prediction(&p, &tp, InternalLabel::G0, t, &s0, 0.5).unwrap();
        let e = effective_forced_prediction(&p, &tp, InternalLabel::E, t, &s0, 0.5).unwrap();
        assert!((g0.x_center() + e.x_center()).abs() < 1e-10);
        assert!((g0.mean_momentum() + e.mean_momentum()).abs() < 1e-10);
        assert!(g0.mean_momentum().abs() + g0.x_center().abs() > 1e-4, "drive had no effect");
        assert!(effective_forced_prediction(&p, &tp, InternalLabel::G1, t, &s0, 0.5).is_err());
        // a tight tolerance rejects the model
        assert!(matches!(
            effective_forced_prediction(&p, &tp, InternalLabel::G0, t, &s0, 1e-6),
            Err(Error::ModelDomain(_))
        ));
    }
}
