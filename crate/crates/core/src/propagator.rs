//! Unitary propagators of quadratic Hamiltonians in canonical classical-flow
//! form, their named special cases, composition, and the inverse
//! free-particle sandwich solver.
//!
//! The canonical representation is the symplectic classical flow
//! `(x_a, p_a) -> (x_b, p_b)` plus a phase-space displacement and a global
//! phase, *not* the kernel coefficients `(S_bb, S_ab, S_aa)`: the kernel form
//! is singular at focal points `omega T = k pi` while the flow is not. The
//! kernel coefficients are a derived view ([`QuadraticPropagator::coefficients`]),
//! available whenever the flow's `B` entry is nonzero:
//!
//! ```text
//! S_bb = D/(mB)    S_ab = -1/(mB)    S_aa = A/(mB)
//! Q_a  = dx/B      Q_b  = dp - D dx / B
//! ```
//!
//! with flow `[[A, B], [C, D]]` and displacement `(dx, dp)`.
//!
//! Global phases follow the kernel convention
//! `G = sqrt(m/(i 2 pi hbar f_ab)) exp{...} e^{i Theta}` with
//! `f_ab = (-S_ab)^{-1}`; `theta` stores the deviation of the true propagator
//! phase from the principal square-root branch, so constructors bake in the
//! focal (Maslov) corrections and `apply` can reproduce exact phases.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::coef::Coef;
use crate::error::{Error, Result};
use crate::quad;

/// Relative tolerance under which a flow's `B` entry counts as zero and the
/// kernel coefficient view stops existing.
const POINT_MAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPropagator {
    mass: f64,
    hbar: f64,
    /// Row-major 2x2 classical flow [[A, B], [C, D]].
    flow: [[f64; 2]; 2],
    /// Phase-space displacement (dx, dp) from linear Hamiltonian terms.
    displacement: (f64, f64),
    /// Global phase beyond the principal-branch prefactor; `None` = untracked.
    theta: Option<f64>,
}

/// Kernel-coefficient view of a propagator (exists iff `B != 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCoefficients {
    pub s_bb: f64,
    pub s_ab: f64,
    pub s_aa: f64,
    pub q_a: f64,
    pub q_b: f64,
    /// `f_ab = (-S_ab)^{-1} = m B`.
    pub f_ab: f64,
    pub theta: Option<f64>,
}

/// One physical segment of a pulse schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseSegment {
    Free { t: f64 },
    InverseFree { t: f64 },
    Harmonic { omega: f64, t: f64 },
    InverseHarmonic { omega: f64, t_prime: f64 },
    ForcedHarmonic { omega: f64, force: ForceSpec, t: f64 },
    GeneralQuadratic { b: Coef, c: Coef, d: Coef, f: Coef, t: f64 },
}

impl PulseSegment {
    pub fn duration(&self) -> f64 {
        match self {
            PulseSegment::Free { t }
            | PulseSegment::Harmonic { t, .. }
            | PulseSegment::ForcedHarmonic { t, .. }
            | PulseSegment::GeneralQuadratic { t, .. } => *t,
            PulseSegment::InverseFree { t } => *t,
            PulseSegment::InverseHarmonic { t_prime, .. } => *t_prime,
        }
    }

    pub fn to_propagator(&self, mass: f64, hbar: f64) -> Result<QuadraticPropagator> {
        match self {
            PulseSegment::Free { t } => QuadraticPropagator::free(*t, mass, hbar),
            PulseSegment::InverseFree { t } => {
                QuadraticPropagator::inverse_free_direct(*t, mass, hbar)
            }
            PulseSegment::Harmonic { omega, t } => {
                QuadraticPropagator::harmonic(*omega, *t, mass, hbar)
            }
            PulseSegment::InverseHarmonic { omega, t_prime } => {
                QuadraticPropagator::harmonic_inverse(*omega, *t_prime, 1, mass, hbar)
            }
            PulseSegment::ForcedHarmonic { omega, force, t } => {
                QuadraticPropagator::forced_harmonic(*omega, force, *t, mass, hbar)
            }
            PulseSegment::GeneralQuadratic { b, c, d, f, t } => {
                QuadraticPropagator::from_quadratic_hamiltonian(b, c, d, f, *t, mass, hbar)
            }
        }
    }
}

/// Force drive `f(t)` for a forced harmonic segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSpec {
    pub shape: Coef,
    /// Absolute quadrature tolerance for the induced displacement integrals.
    pub quad_tol: f64,
}

impl ForceSpec {
    pub fn constant(f0: f64) -> Self {
        ForceSpec { shape: Coef::Const(f0), quad_tol: 1e-10 }
    }

    pub fn sinusoid(amp: f64, freq: f64, phase: f64) -> Self {
        ForceSpec { shape: Coef::Cos { amp, freq, phase }, quad_tol: 1e-10 }
    }
}

/// Sign branch of the sandwich trig system (upper = top signs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignBranch {
    Upper,
    Lower,
}

/// Durations realizing the inverse free flight as
/// `U_o1(T1) U_f(T) U_o2(T2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichSolution {
    pub t1: f64,
    pub t2: f64,
    pub branch: SignBranch,
    /// Max-abs residual of the composed flow against the inverse free flow.
    pub verification_residual: f64,
}

impl QuadraticPropagator {
    pub fn identity(mass: f64, hbar: f64) -> Self {
        QuadraticPropagator {
            mass,
            hbar,
            flow: [[1.0, 0.0], [0.0, 1.0]],
            displacement: (0.0, 0.0),
            theta: Some(0.0),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn flow(&self) -> [[f64; 2]; 2] {
        self.flow
    }
    pub fn displacement(&self) -> (f64, f64) {
        self.displacement
    }
    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn det_flow(&self) -> f64 {
        self.flow[0][0] * self.flow[1][1] - self.flow[0][1] * self.flow[1][0]
    }

    fn flow_scale(&self) -> f64 {
        self.flow
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1.0)
    }

    /// True when the kernel coefficient view does not exist (B ~ 0).
    pub fn is_point_map(&self) -> bool {
        self.flow[0][1].abs() <= POINT_MAP_TOL * self.flow_scale()
    }

    /// Build from raw flow data (validated to be symplectic).
    pub fn from_flow(
        mass: f64,
        hbar: f64,
        flow: [[f64; 2]; 2],
        displacement: (f64, f64),
        theta: Option<f64>,
    ) -> Result<Self> {
        check_units(mass, hbar)?;
        let det = flow[0][0] * flow[1][1] - flow[0][1] * flow[1][0];
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("flow must be symplectic; det = {det}")));
        }
        Ok(QuadraticPropagator { mass, hbar, flow, displacement, theta })
    }

    /// Build from kernel coefficients. Any `(S_bb, S_ab, S_aa)` triple with
    /// `S_ab != 0` yields a symplectic flow.
    pub fn from_coefficients(
        mass: f64,
        hbar: f64,
        s_bb: f64,
        s_ab: f64,
        s_aa: f64,
        q_a: f64,
        q_b: f64,
        theta: Option<f64>,
    ) -> Result<Self> {
        check_units(mass, hbar)?;
        if s_ab == 0.0 || !s_ab.is_finite() {
            return Err(Error::Domain(format!("S_ab must be finite and nonzero, got {s_ab}")));
        }
        let b = -1.0 / (mass * s_ab);
        let a = -s_aa / s_ab;
        let d = -s_bb / s_ab;
        let c = mass * (s_ab * s_ab - s_aa * s_bb) / s_ab;
        let dx = b * q_a;
        let dp = d * q_a + q_b;
        Ok(QuadraticPropagator {
            mass,
            hbar,
            flow: [[a, b], [c, d]],
            displacement: (dx, dp),
            theta,
        })
    }

    /// Kernel coefficient view; errors on point maps (focal propagators).
    pub fn coefficients(&self) -> Result<KernelCoefficients> {
        if self.is_point_map() {
            return Err(Error::ViewUnavailable(
                "flow is a point map (focal propagator); no kernel coefficients".into(),
            ));
        }
        let [[a, b], [_, d]] = self.flow;
        let (dx, dp) = self.displacement;
        let m = self.mass;
        Ok(KernelCoefficients {
            s_bb: d / (m * b),
            s_ab: -1.0 / (m * b),
            s_aa: a / (m * b),
            q_a: dx / b,
            q_b: dp - d * dx / b,
            f_ab: m * b,
            theta: self.theta,
        })
    }

    /// Free flight over `t`.
    pub fn free(t: f64, mass: f64, hbar: f64) -> Result<Self> {
        check_units(mass, hbar)?;
        check_positive("T", t)?;
        Ok(QuadraticPropagator {
            mass,
            hbar,
            flow: [[1.0, t / mass], [0.0, 1.0]],
            displacement: (0.0, 0.0),
            theta: Some(0.0),
        })
    }

    /// Inverse free flight over `t`: exactly `free(t)^{-1}`.
    pub fn inverse_free_direct(t: f64, mass: f64, hbar: f64) -> Result<Self> {
        check_units(mass, hbar)?;
        check_positive("T", t)?;
        Ok(QuadraticPropagator {
            mass,
            hbar,
            flow: [[1.0, -t / mass], [0.0, 1.0]],
            displacement: (0.0, 0.0),
            theta: Some(0.0),
        })
    }

    /// Harmonic oscillator of frequency `omega` over `t`. Focal points
    /// `omega t = k pi` yield the exact point map `(-1)^k I` with scalar
    /// phase `e^{-i k pi / 2}` instead of the singular kernel.
    pub fn harmonic(omega: f64, t: f64, mass: f64, hbar: f64) -> Result<Self> {
        check_units(mass, hbar)?;
        check_positive("omega", omega)?;
        check_positive("T", t)?;
        let phase = omega * t;
        let s = phase.sin();
        if s.abs() <= 1e-12 * (1.0 + phase.abs()) {
            let k = (phase / PI).round() as i64;
            let sigma = if k % 2 == 0 { 1.0 } else { -1.0 };
            let theta = maslov_phase(k);
            return Ok(QuadraticPropagator {
                mass,
                hbar,
                flow: [[sigma, 0.0], [0.0, sigma]],
                displacement: (0.0, 0.0),
                theta: Some(theta),
            });
        }
        let c = phase.cos();
        let flow = [[c, s / (mass * omega)], [-mass * omega * s, c]];
        // Correction from the principal branch of sqrt(1/(i sin)) to the true
        // propagator phase -pi/4 - k pi/2 after k focal crossings.
        let k = (phase / PI).floor();
        let f_ab = mass * flow[0][1];
        let principal = (C64::new(0.0, 2.0 * PI * hbar * f_ab / mass))
            .sqrt()
            .inv()
            .arg();
        let true_phase = -PI / 4.0 - k * PI / 2.0;
        Ok(QuadraticPropagator {
            mass,
            hbar,
            flow,
            displacement: (0.0, 0.0),
            theta: Some(wrap_angle(true_phase - principal)),
        })
    }

    /// Inverse harmonic propagator realized as forward evolution over the
    /// period complement `2 k pi / omega - t_prime`. The global phase of the
    /// true inverse is not fixed by this construction; `theta` is untracked.
    pub fn harmonic_inverse(
        omega: f64,
        t_prime: f64,
        k: u32,
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        check_units(mass, hbar)?;
        check_positive("omega", omega)?;
        check_positive("T'", t_prime)?;
        if k == 0 {
            return Err(Error::Domain("k must be a positive integer".into()));
        }
        let period_k = 2.0 * PI * k as f64 / omega;
        if t_prime > period_k {
            return Err(Error::Domain(format!(
                "T' = {t_prime} exceeds 2 k pi / omega = {period_k}"
            )));
        }
        let t1 = period_k - t_prime;
        if t1 <= 1e-12 * period_k {
            // T' = 2 k pi / omega exactly: the complement has zero duration.
            let mut id = QuadraticPropagator::identity(mass, hbar);
            id.theta = None;
            return Ok(id);
        }
        let mut g = QuadraticPropagator::harmonic(omega, t1, mass, hbar)?;
        g.theta = None;
        Ok(g)
    }

    /// Forced harmonic oscillator: harmonic quadratic part plus the
    /// displacement integrals
    ///
    /// ```text
    /// Q_a = -1/sin(wT) int f(t) sin[w (t_b - t)] dt
    /// Q_b = -1/sin(wT) int f(t) sin[w (t - t_a)] dt
    /// Theta = -1/(m w hbar sin(wT)) int int f(t) f(s)
    ///           sin[w (t_b - t)] sin[w (s - t_a)] ds dt   (s < t)
    /// ```
    ///
    /// evaluated on `[0, T]` by adaptive quadrature.
    pub fn forced_harmonic(
        omega: f64,
        force: &ForceSpec,
        t: f64,
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        check_units(mass, hbar)?;
        check_positive("omega", omega)?;
        check_positive("T", t)?;
        force
            .shape
            .validate()
            .map_err(|e| Error::Domain(format!("force: {e}")))?;
        let s = (omega * t).sin();
        if s.abs() <= 1e-12 * (1.0 + omega * t) {
            return Err(Error::FocalSingularity(format!(
                "omega T = {} is a focal point; split the forced segment",
                omega * t
            )));
        }
        let tol = force.quad_tol;
        let f = |u: f64| force.shape.eval(u);
        let q_a = -quad::integrate(|u| f(u) * (omega * (t - u)).sin(), 0.0, t, tol)? / s;
        let q_b = -quad::integrate(|u| f(u) * (omega * u).sin(), 0.0, t, tol)? / s;
        // Theta: the ordered double integral, with the inner cumulative
        // integral tabulated once by composite Simpson. Nesting two adaptive
        // passes would feed the outer integrand the inner pass's refinement
        // jitter and stall its convergence.
        let theta_tol = 1e-9;
        let n_panels = ((omega * t / (2.0 * PI) + 1.0) * 64.0)
            .max(4096.0)
            .min(1e6) as usize;
        let h = t / n_panels as f64;
        let mut cumulative = Vec::with_capacity(n_panels + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        let inner_f = |v: f64| f(v) * (omega * v).sin();
        let mut prev = inner_f(0.0);
        for i in 0..n_panels {
            let mid = inner_f((i as f64 + 0.5) * h);
            let end = inner_f((i + 1) as f64 * h);
            acc += (prev + 4.0 * mid + end) * h / 6.0;
            prev = end;
            cumulative.push(acc);
        }
        let inner_at = |u: f64| -> f64 {
            let k = ((u / h) as usize).min(n_panels);
            let u_k = k as f64 * h;
            let d = u - u_k;
            if d <= 0.0 {
                return cumulative[k];
            }
            cumulative[k]
                + (inner_f(u_k) + 4.0 * inner_f(u_k + d / 2.0) + inner_f(u)) * d / 6.0
        };
        let theta_int = quad::integrate(
            |u| f(u) * (omega * (t - u)).sin() * inner_at(u),
            0.0,
            t,
            theta_tol,
        )?;
        let theta_forced = -theta_int / (mass * omega * hbar * s);
        let base = QuadraticPropagator::harmonic(omega, t, mass, hbar)?;
        let [[_, b], [_, d]] = base.flow;
        let dx = b * q_a;
        let dp = d * q_a + q_b;
        Ok(QuadraticPropagator {
            mass,
            hbar,
            flow: base.flow,
            displacement: (dx, dp),
            theta: base.theta.map(|th| wrap_angle(th + theta_forced)),
        })
    }

    /// Propagator of the general quadratic Hamiltonian
    /// `H = p^2/2m + b(t)(px+xp)/2 + c(t)x^2/2 + d(t)p + f(t)x`
    /// by 4th-order integration of the classical equations of motion
    ///
    /// ```text
    /// d/dt (x, p) = [[b, 1/m], [-c, -b]] (x, p) + (d, -f)
    /// ```
    ///
    /// with Richardson step control so that `det(flow)` drifts by < 1e-10.
    pub fn from_quadratic_hamiltonian(
        b: &Coef,
        c: &Coef,
        d: &Coef,
        f: &Coef,
        t: f64,
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        check_units(mass, hbar)?;
        check_positive("T", t)?;
        for (name, coef) in [("b", b), ("c", c), ("d", d), ("f", f)] {
            coef.validate()
                .map_err(|e| Error::Domain(format!("coefficient {name}: {e}")))?;
        }
        // local scale estimate to seed the step count
        let mut scale = 1.0f64 / t;
        for i in 0..=16 {
            let u = t * i as f64 / 16.0;
            scale = scale
                .max(b.eval(u).abs())
                .max((c.eval(u).abs() / mass).sqrt())
                .max(c.eval(u).abs());
        }
        let mut n = ((t * scale * 8.0).ceil() as usize).clamp(32, 1 << 16);
        let mut prev = integrate_flow(b, c, d, f, t, mass, n);
        loop {
            n *= 2;
            let fine = integrate_flow(b, c, d, f, t, mass, n);
            let diff = flow_distance(&prev, &fine);
            let det = fine.0[0][0] * fine.0[1][1] - fine.0[0][1] * fine.0[1][0];
            if diff < 1e-12 && (det - 1.0).abs() < 1e-10 {
                return Ok(QuadraticPropagator {
                    mass,
                    hbar,
                    flow: fine.0,
                    displacement: fine.1,
                    theta: None,
                });
            }
            if n >= 1 << 22 {
                return Err(Error::Numeric(format!(
                    "flow integration did not converge (Richardson delta {diff:.3e}, det drift {:.3e})",
                    (det - 1.0).abs()
                )));
            }
            prev = fine;
        }
    }

    /// Composite propagator `g2 . g1` (g1 acts first).
    pub fn compose(g2: &Self, g1: &Self) -> Result<Self> {
        if g2.mass != g1.mass || g2.hbar != g1.hbar {
            return Err(Error::Domain("compose: mismatched mass or hbar".into()));
        }
        let f2 = g2.flow;
        let f1 = g1.flow;
        let flow = [
            [
                f2[0][0] * f1[0][0] + f2[0][1] * f1[1][0],
                f2[0][0] * f1[0][1] + f2[0][1] * f1[1][1],
            ],
            [
                f2[1][0] * f1[0][0] + f2[1][1] * f1[1][0],
                f2[1][0] * f1[0][1] + f2[1][1] * f1[1][1],
            ],
        ];
        let (dx1, dp1) = g1.displacement;
        let (dx2, dp2) = g2.displacement;
        let displacement = (
            f2[0][0] * dx1 + f2[0][1] * dp1 + dx2,
            f2[1][0] * dx1 + f2[1][1] * dp1 + dp2,
        );
        let theta = compose_theta(g2, g1, &flow);
        Ok(QuadraticPropagator { mass: g1.mass, hbar: g1.hbar, flow, displacement, theta })
    }

    /// Inverse propagator at the flow level (for verification; theta is the
    /// negated phase only for scalar point maps, untracked otherwise).
    pub fn inverse_flow(&self) -> Self {
        let [[a, b], [c, d]] = self.flow;
        let inv = [[d, -b], [-c, a]];
        let (dx, dp) = self.displacement;
        let displacement = (-(d * dx - b * dp), -(-c * dx + a * dp));
        let theta = if self.is_point_map() { self.theta.map(|t| wrap_angle(-t)) } else { None };
        QuadraticPropagator {
            mass: self.mass,
            hbar: self.hbar,
            flow: inv,
            displacement,
            theta,
        }
    }

    /// Max-abs distance between flows and displacements.
    pub fn flow_distance(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.flow[i][j] - other.flow[i][j]).abs());
            }
        }
        m = m.max((self.displacement.0 - other.displacement.0).abs());
        m.max((self.displacement.1 - other.displacement.1).abs())
    }
}

fn check_units(mass: f64, hbar: f64) -> Result<()> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Exact scalar phase of the harmonic propagator at the focal point
/// `omega T = k pi`: `e^{-i H T / hbar}` maps `psi(x)` to
/// `e^{-i k pi / 2} psi((-1)^k x)`.
fn maslov_phase(k: i64) -> f64 {
    wrap_angle(-(k as f64) * PI / 2.0)
}

type FlowAndShift = ([[f64; 2]; 2], (f64, f64));

fn integrate_flow(b: &Coef, c: &Coef, d: &Coef, f: &Coef, t: f64, mass: f64, n: usize) -> FlowAndShift {
    // State: columns of the flow matrix + the displacement vector, all
    // evolving under the same affine ODE.
    let mut y = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]; // [A, C, Bcol_x, Bcol_p... ] see deriv
    // layout: y = [x1, p1, x2, p2, xd, pd] where (x1,p1) starts at (1,0),
    // (x2,p2) at (0,1), (xd,pd) at (0,0) with inhomogeneous terms.
    let h = t / n as f64;
    let deriv = |u: f64, y: &[f64; 6]| -> [f64; 6] {
        let bv = b.eval(u);
        let cv = c.eval(u);
        let dv = d.eval(u);
        let fv = f.eval(u);
        let lin = |x: f64, p: f64| (bv * x + p / mass, -cv * x - bv * p);
        let (dx1, dp1) = lin(y[0], y[1]);
        let (dx2, dp2) = lin(y[2], y[3]);
        let (dxd, dpd) = lin(y[4], y[5]);
        [dx1, dp1, dx2, dp2, dxd + dv, dpd - fv]
    };
    for i in 0..n {
        let u0 = i as f64 * h;
        let k1 = deriv(u0, &y);
        let y2 = add_scaled(&y, &k1, h / 2.0);
        let k2 = deriv(u0 + h / 2.0, &y2);
        let y3 = add_scaled(&y, &k2, h / 2.0);
        let k3 = deriv(u0 + h / 2.0, &y3);
        let y4 = add_scaled(&y, &k3, h);
        let k4 = deriv(u0 + h, &y4);
        for j in 0..6 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    ([[y[0], y[2]], [y[1], y[3]]], (y[4], y[5]))
}

fn add_scaled(y: &[f64; 6], k: &[f64; 6], s: f64) -> [f64; 6] {
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = y[i] + s * k[i];
    }
    out
}

fn flow_distance(a: &FlowAndShift, b: &FlowAndShift) -> f64 {
    let mut m = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a.0[i][j] - b.0[i][j]).abs());
        }
    }
    m = m.max((a.1 .0 - b.1 .0).abs());
    m.max((a.1 .1 - b.1 .1).abs())
}

/// Scalar-point-map check: flow = +-I (displacements allowed).
fn scalar_point_sigma(g: &QuadraticPropagator) -> Option<f64> {
    let s = g.flow_scale();
    let [[a, b], [c, d]] = g.flow;
    for sigma in [1.0f64, -1.0] {
        if (a - sigma).abs() <= 1e-12 * s
            && (d - sigma).abs() <= 1e-12 * s
            && b.abs() <= 1e-12 * s
            && c.abs() <= 1e-12 * s
        {
            return Some(sigma);
        }
    }
    None
}

/// Global phase of the composite kernel, when it can be tracked.
fn compose_theta(
    g2: &QuadraticPropagator,
    g1: &QuadraticPropagator,
    flow_tot: &[[f64; 2]; 2],
) -> Option<f64> {
    let th1 = g1.theta?;
    let th2 = g2.theta?;
    let m = g1.mass;
    let hbar = g1.hbar;

    // Scalar point-map factors compose by substitution, no integral arises.
    if let Some(sigma1) = scalar_point_sigma(g1) {
        let (dx1, dp1) = g1.displacement;
        if g2.is_point_map() {
            let sigma2 = scalar_point_sigma(g2)?;
            let (dx2, _) = g2.displacement;
            let _ = sigma1;
            return Some(wrap_angle(th1 + th2 - dp1 * sigma2 * dx2 / hbar));
        }
        let k2 = g2.coefficients().ok()?;
        // G2's x_a-slot receives x_c = sigma1 x_a + dx1 and the e^{i dp1 x_c}
        // phase of g1; the constant parts join the global phase.
        let extra = m / (2.0 * hbar) * k2.s_aa * dx1 * dx1
            + k2.q_a * dx1 / hbar
            + dp1 * dx1 / hbar;
        return Some(wrap_angle(th1 + th2 + extra));
    }
    if let Some(sigma2) = scalar_point_sigma(g2) {
        let k1 = g1.coefficients().ok()?;
        let (dx2, _) = g2.displacement;
        let extra = m / (2.0 * hbar) * k1.s_bb * dx2 * dx2 - k1.q_b * sigma2 * dx2 / hbar;
        return Some(wrap_angle(th1 + th2 + extra));
    }

    let k1 = g1.coefficients().ok()?;
    let k2 = g2.coefficients().ok()?;
    let mid = k1.s_bb + k2.s_aa;
    let scale = k1.s_bb.abs().max(k2.s_aa.abs()).max(1e-300);
    if mid.abs() <= 1e-11 * scale {
        // The intermediate integral degenerates to a delta function; the
        // composite is a point map handled above only for scalar flows.
        if let Some(_sigma) = scalar_point_sigma(&QuadraticPropagator {
            mass: m,
            hbar,
            flow: *flow_tot,
            displacement: (0.0, 0.0),
            theta: None,
        }) {
            // delta-composition prefactor: P1 P2 * 2 pi hbar / (m |S1_ab|)
            let p1 = kernel_prefactor(m, hbar, k1.f_ab);
            let p2 = kernel_prefactor(m, hbar, k2.f_ab);
            let pref = p1 * p2 * C64::new(2.0 * PI * hbar / (m * k1.s_ab.abs()), 0.0);
            let qsum = k1.q_b + k2.q_a;
            // linear phase at the delta's support contributes only through
            // displacement terms; with the scalar flow the residual constant
            // is -(Q1b + Q2a)^2-independent and the delta collapses cleanly
            // only when qsum-driven shifts vanish.
            if qsum.abs() <= 1e-9 {
                return Some(wrap_angle(th1 + th2 + pref.arg()));
            }
        }
        return None;
    }
    // Regular case: Gaussian integral over the intermediate coordinate.
    let a_c = C64::new(0.0, -m * mid / (2.0 * hbar));
    let qsum = k1.q_b + k2.q_a;
    let phi_const = -qsum * qsum / (2.0 * m * hbar * mid);
    let b_tot = flow_tot[0][1];
    if b_tot.abs() <= POINT_MAP_TOL {
        return None;
    }
    let f_tot = m * b_tot;
    let z = kernel_prefactor(m, hbar, k1.f_ab) * kernel_prefactor(m, hbar, k2.f_ab)
        * (C64::new(PI, 0.0) / a_c).sqrt()
        / kernel_prefactor(m, hbar, f_tot);
    Some(wrap_angle(th1 + th2 + phi_const + z.arg()))
}

fn kernel_prefactor(m: f64, hbar: f64, f_ab: f64) -> C64 {
    (C64::new(0.0, 2.0 * PI * hbar * f_ab / m)).sqrt().inv()
}

/// Solve the trig system realizing `U_f(T)^+ = U_o1(T1) U_f(T) U_o2(T2)`:
///
/// ```text
/// sin(w1 T1) = -+ 2 T w1 w2^2 / R      cos(w1 T1) = -+ [T^2 w1^2 w2^2 - (w2^2 - w1^2)] / R
/// sin(w2 T2) = +- 2 T w1^2 w2 / R      cos(w2 T2) = +- [T^2 w1^2 w2^2 + (w2^2 - w1^2)] / R
/// ```
///
/// with the shared normalizer `R`; angles are recovered by two-argument
/// arctangent as their minimal positive representatives.
pub fn inverse_free_sandwich(t: f64, omega1: f64, omega2: f64) -> Result<SandwichSolution> {
    inverse_free_sandwich_branch(t, omega1, omega2, SignBranch::Upper)
}

pub fn inverse_free_sandwich_branch(
    t: f64,
    omega1: f64,
    omega2: f64,
    branch: SignBranch,
) -> Result<SandwichSolution> {
    check_positive("T", t)?;
    check_positive("omega1", omega1)?;
    check_positive("omega2", omega2)?;
    let sgn = match branch {
        SignBranch::Upper => -1.0,
        SignBranch::Lower => 1.0,
    };
    let w1s = omega1 * omega1;
    let w2s = omega2 * omega2;
    let a1 = t * t * w1s * w2s - (w2s - w1s);
    let r1 = a1.hypot(2.0 * t * omega1 * w2s);
    let sin1 = sgn * 2.0 * t * omega1 * w2s / r1;
    let cos1 = sgn * a1 / r1;
    let a2 = t * t * w1s * w2s + (w2s - w1s);
    let r2 = a2.hypot(2.0 * t * w1s * omega2);
    let sin2 = -sgn * 2.0 * t * w1s * omega2 / r2;
    let cos2 = -sgn * a2 / r2;
    let t1 = positive_angle(sin1.atan2(cos1)) / omega1;
    let t2 = positive_angle(sin2.atan2(cos2)) / omega2;

    // Verify by composition against the inverse free flow (mass drops out of
    // the trig system; any positive mass works for the check).
    let (m, hbar) = (1.0, 1.0);
    let g1 = QuadraticPropagator::harmonic(omega1, t1, m, hbar)?;
    let gf = QuadraticPropagator::free(t, m, hbar)?;
    let g2 = QuadraticPropagator::harmonic(omega2, t2, m, hbar)?;
    let comp = QuadraticPropagator::compose(&g1, &QuadraticPropagator::compose(&gf, &g2)?)?;
    let target = QuadraticPropagator::inverse_free_direct(t, m, hbar)?;
    let residual = comp.flow_distance(&target);
    if residual > 1e-8 * (1.0 + t * omega1.max(omega2)) {
        return Err(Error::NoSolution(format!(
            "sandwich verification residual {residual:.3e} for (T, w1, w2) = ({t}, {omega1}, {omega2})"
        )));
    }
    Ok(SandwichSolution { t1, t2, branch, verification_residual: residual })
}

fn positive_angle(a: f64) -> f64 {
    if a <= 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}
