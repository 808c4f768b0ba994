//! Split-step spectral propagation on a uniform position grid with up to
//! three internal levels.
//!
//! One step is the symmetric splitting `K(dt/2) V(dt) K(dt/2)` with all
//! time-dependent coefficients frozen at the step midpoint (second-order
//! accurate). The kinetic factor (including any `d(t) p` term) is diagonal
//! in momentum space; the potential plus internal coupling is diagonal in
//! position, with the two driven levels exponentiated in closed 2x2 form per
//! grid point.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;

use crate::coef::Coef;
use crate::error::{Error, Result};
use crate::state::GaussianState;

/// Uniform periodic grid `x_j = x_min + j (x_max - x_min)/n`, `n` a power of
/// two and at least 256.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::Domain("grid: x_max must exceed x_min".into()));
        }
        if n < 256 || !n.is_power_of_two() {
            return Err(Error::Domain(format!(
                "grid: n must be a power of two >= 256, got {n}"
            )));
        }
        Ok(GridSpec { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|j| self.x_min + j as f64 * dx).collect()
    }

    /// FFT wavenumbers in the usual positive/negative layout.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let l = self.x_max - self.x_min;
        let dk = 2.0 * PI / l;
        (0..self.n)
            .map(|j| {
                if j <= self.n / 2 { j as f64 * dk } else { (j as f64 - self.n as f64) * dk }
            })
            .collect()
    }

    /// Default grid for a state: `pad` spreadings on both sides of the
    /// center (at least 8 recommended), rounded up to a power of two at
    /// `points_per_spreading` resolution.
    pub fn for_state(state: &GaussianState, pad: f64, points_per_spreading: usize) -> Result<Self> {
        let eps = state.spreading();
        let half = (pad * eps).max(1e-12) + state.x_center().abs();
        let dx_target = eps / points_per_spreading as f64;
        let mut n = ((2.0 * half / dx_target).ceil() as usize).next_power_of_two();
        n = n.max(256);
        GridSpec::new(-half, half, n)
    }
}

/// Complex amplitudes per internal level on a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct GridState {
    pub spec: GridSpec,
    pub mass: f64,
    pub hbar: f64,
    /// One amplitude array per internal level (length 1 or 3).
    pub amps: Vec<Vec<C64>>,
}

impl GridState {
    /// Discretize a Gaussian state on the grid, placed in internal level
    /// `level` of `n_levels`.
    pub fn from_gaussian(
        s: &GaussianState,
        spec: GridSpec,
        level: usize,
        n_levels: usize,
    ) -> Result<Self> {
        if level >= n_levels {
            return Err(Error::Domain(format!("level {level} out of {n_levels}")));
        }
        let xs = spec.points();
        let sampled = s.sample(&xs)?;
        if !sampled.adequate_coverage {
            return Err(Error::Domain(
                "grid does not cover 6 spreadings around the packet center".into(),
            ));
        }
        let mut amps = vec![vec![C64::new(0.0, 0.0); spec.n]; n_levels];
        amps[level] = sampled.amps;
        let mut st = GridState { spec, mass: s.mass(), hbar: s.hbar(), amps };
        st.renormalize();
        Ok(st)
    }

    pub fn norm_sq(&self) -> f64 {
        let dx = self.spec.dx();
        self.amps
            .iter()
            .map(|a| a.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * dx
    }

    fn renormalize(&mut self) {
        let n = self.norm_sq().sqrt();
        for a in &mut self.amps {
            for z in a.iter_mut() {
                *z /= n;
            }
        }
    }

    pub fn level_population(&self, level: usize) -> f64 {
        let dx = self.spec.dx();
        self.amps[level].iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
    }

    /// Probability mass in the outer `frac` of the domain on each side.
    pub fn edge_mass(&self, frac: f64) -> f64 {
        let n = self.spec.n;
        let edge = ((n as f64 * frac) as usize).max(1);
        let dx = self.spec.dx();
        self.amps
            .iter()
            .map(|a| {
                a[..edge].iter().map(|z| z.norm_sqr()).sum::<f64>()
                    + a[n - edge..].iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
            * dx
    }

    /// Inner product `<self|other>` over all levels.
    pub fn inner(&self, other: &GridState) -> Result<C64> {
        if self.spec != other.spec || self.amps.len() != other.amps.len() {
            return Err(Error::Domain("grid states live on different spaces".into()));
        }
        let dx = self.spec.dx();
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(&other.amps) {
            for (x, y) in a.iter().zip(b) {
                acc += x.conj() * y;
            }
        }
        Ok(acc * dx)
    }
}

/// Hamiltonian specification for the grid solver:
/// `H = p^2/2m + c(t) x^2/2 + d(t) p + f(t) x (+ internal coupling)`.
///
/// The `b(t)(px+xp)/2` term of the general quadratic family is not
/// splittable on a grid; use the Fock solver for it.
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    pub c: Coef,
    pub d: Coef,
    pub f: Coef,
    pub coupling: Option<GridCoupling>,
}

impl GridHamiltonian {
    pub fn quadratic(c: Coef, d: Coef, f: Coef) -> Self {
        GridHamiltonian { c, d, f, coupling: None }
    }

    pub fn harmonic(mass: f64, omega: f64) -> Self {
        GridHamiltonian {
            c: Coef::Const(mass * omega * omega),
            d: Coef::Zero,
            f: Coef::Zero,
            coupling: None,
        }
    }

    fn n_levels(&self) -> usize {
        if self.coupling.is_some() { 3 } else { 1 }
    }
}

/// Internal-level coupling, diagonal in position. Levels are ordered
/// `(g0, g1, e)`; the drive touches only `g0 <-> e`.
#[derive(Debug, Clone)]
pub enum GridCoupling {
    /// Matched two-beam drive in the rotating frame:
    /// `2 hbar rabi cos(k_diff x/2 - alpha) [ I+ e^{i(k_sum x/2 - gamma)} + h.c. ]`
    /// plus `hbar detuning I_z`.
    Matched { rabi: f64, alpha: f64, gamma: f64, k_sum: f64, k_diff: f64, detuning: f64 },
}

/// Propagate `steps` split-steps of size `dt`.
pub fn grid_evolve(
    h: &GridHamiltonian,
    psi0: &GridState,
    dt: f64,
    steps: usize,
) -> Result<GridState> {
    if !(dt > 0.0) || steps == 0 {
        return Err(Error::Domain("grid_evolve: dt and steps must be positive".into()));
    }
    if psi0.amps.len() != h.n_levels() {
        return Err(Error::Domain(format!(
            "state has {} levels but Hamiltonian wants {}",
            psi0.amps.len(),
            h.n_levels()
        )));
    }
    let spec = psi0.spec;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(spec.n);
    let inv = planner.plan_fft_inverse(spec.n);
    let ks = spec.wavenumbers();
    let xs = spec.points();
    let mut st = psi0.clone();
    let hbar = st.hbar;
    let mass = st.mass;

    let norm0 = st.norm_sq();
    if (norm0 - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!("initial norm {norm0} is not 1")));
    }

    for step in 0..steps {
        let tm = (step as f64 + 0.5) * dt;
        let cv = h.c.eval(tm);
        let dv = h.d.eval(tm);
        let fv = h.f.eval(tm);

        // kinetic phases exp[-i (hbar k^2/2m + d k) dt/2]
        let kin: Vec<C64> = ks
            .iter()
            .map(|&k| C64::new(0.0, -(hbar * k * k / (2.0 * mass) + dv * k) * dt / 2.0).exp())
            .collect();
        for a in &mut st.amps {
            apply_kinetic(&*fwd, &*inv, a, &kin);
        }
        apply_potential(h, &mut st, &xs, cv, fv, dt, hbar);
        for a in &mut st.amps {
            apply_kinetic(&*fwd, &*inv, a, &kin);
        }

        let norm = st.norm_sq();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Numeric(format!(
                "norm drifted to {norm} at step {step}; reduce dt"
            )));
        }
        if step % 32 == 31 || step + 1 == steps {
            let edge = st.edge_mass(0.05);
            if edge > 1e-10 {
                return Err(Error::DomainEscape(format!(
                    "edge probability {edge:.3e} at step {step}; enlarge the grid"
                )));
            }
        }
    }
    Ok(st)
}

fn apply_kinetic(fwd: &dyn Fft<f64>, inv: &dyn Fft<f64>, a: &mut [C64], kin: &[C64]) {
    fwd.process(a);
    let n = a.len() as f64;
    for (z, k) in a.iter_mut().zip(kin) {
        *z *= k / n;
    }
    inv.process(a);
}

fn apply_potential(
    h: &GridHamiltonian,
    st: &mut GridState,
    xs: &[f64],
    cv: f64,
    fv: f64,
    dt: f64,
    hbar: f64,
) {
    match &h.coupling {
        None => {
            let a = &mut st.amps[0];
            for (z, &x) in a.iter_mut().zip(xs) {
                let v = 0.5 * cv * x * x + fv * x;
                *z *= C64::new(0.0, -v * dt / hbar).exp();
            }
        }
        Some(GridCoupling::Matched { rabi, alpha, gamma, k_sum, k_diff, detuning }) => {
            // per-point 3x3 exponential: g1 is a pure phase, (g0, e) a 2x2
            // closed-form rotation
            for (j, &x) in xs.iter().enumerate() {
                let v = 0.5 * cv * x * x + fv * x;
                let g1_phase = C64::new(0.0, -v * dt / hbar).exp();
                // coupling element <e|H|g0>
                let w = 2.0 * hbar * rabi * (0.5 * k_diff * x - alpha).cos()
                    * C64::new(0.0, 0.5 * k_sum * x - gamma).exp();
                // 2x2 block in (g0, e): diag(v - hbar*det/2, v + hbar*det/2)
                let dz = 0.5 * hbar * detuning;
                // exp(-i dt/hbar [v I + dz sz' + coupling]) with sz' = diag(-1, +1)
                let phase = C64::new(0.0, -v * dt / hbar).exp();
                let bnorm = (dz * dz + w.norm_sqr()).sqrt();
                let (cb, sb) = if bnorm > 0.0 {
                    let th = bnorm * dt / hbar;
                    (th.cos(), th.sin() / bnorm)
                } else {
                    (1.0, dt / hbar)
                };
                let u00 = phase * C64::new(cb, sb * dz); // g0 row
                let u11 = phase * C64::new(cb, -sb * dz); // e row
                let u01 = phase * C64::new(0.0, -sb) * w.conj();
                let u10 = phase * C64::new(0.0, -sb) * w;
                let g0 = st.amps[0][j];
                let e = st.amps[2][j];
                st.amps[0][j] = u00 * g0 + u01 * e;
                st.amps[2][j] = u10 * g0 + u11 * e;
                st.amps[1][j] *= g1_phase;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_is_stationary() {
        let s = GaussianState::trap_ground(1.0, 1.0, 1.0).unwrap();
        let spec = GridSpec::new(-12.0, 12.0, 512).unwrap();
        let g0 = GridState::from_gaussian(&s, spec, 0, 1).unwrap();
        let h = GridHamiltonian::harmonic(1.0, 1.0);
        let out = grid_evolve(&h, &g0, 5e-3, 1000).unwrap();
        let fid = out.inner(&g0).unwrap().norm();
        assert!(fid > 1.0 - 1e-8, "fidelity {fid}");
    }

    #[test]
    fn norm_is_conserved() {
        let s = GaussianState::new(1.0, 1.0, 0.5, 1.0, 0.4, 0.0, Some(0.0)).unwrap();
        let spec = GridSpec::new(-16.0, 16.0, 1024).unwrap();
        let g0 = GridState::from_gaussian(&s, spec, 0, 1).unwrap();
        let h = GridHamiltonian::harmonic(1.0, 1.3);
        let out = grid_evolve(&h, &g0, 2e-3, 500).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn escape_is_detected() {
        // fast packet on a small grid must trip the boundary guard
        let s = GaussianState::new(1.0, 1.0, 0.0, 6.0, 0.3, 0.0, Some(0.0)).unwrap();
        let spec = GridSpec::new(-8.0, 8.0, 512).unwrap();
        let g0 = GridState::from_gaussian(&s, spec, 0, 1).unwrap();
        let h = GridHamiltonian::quadratic(Coef::Zero, Coef::Zero, Coef::Zero);
        let r = grid_evolve(&h, &g0, 5e-3, 400);
        assert!(matches!(r, Err(Error::DomainEscape(_))), "got {r:?}");
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(-1.0, 1.0, 100).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 300).is_err());
        assert!(GridSpec::new(1.0, -1.0, 512).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 512).is_ok());
    }
}
