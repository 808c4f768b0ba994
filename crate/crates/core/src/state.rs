//! Gaussian wave-packet states and the closed-form Gaussian integral they are
//! built on.
//!
//! A state is fully described by its center-of-mass position, mean momentum,
//! and complex linewidth `W = (dx)^2 + i hbar T / (2 m)`; the real part sets
//! the spatial spread and the imaginary part the accumulated dispersive phase
//! curvature. The wavefunction is
//!
//! ```text
//! psi(x) = e^{i phi} [ (dx)^2 / 2 pi ]^{1/4} sqrt(1/W)
//!          exp{ -(x - x0)^2 / (4 W) } exp{ i pbar x / hbar }
//! ```
//!
//! The stored `mean_momentum` is the physical mean momentum `pbar`; texts
//! that write the plane-wave factor as `exp[-i p0 x / hbar]` call `-p0` the
//! mean momentum, so `p0 = -pbar` throughout.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Complex linewidth `W = real_part + i * imag_part`, both in units of
/// length squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLinewidth {
    pub real_part: f64,
    pub imag_part: f64,
}

impl ComplexLinewidth {
    pub fn as_complex(&self) -> C64 {
        C64::new(self.real_part, self.imag_part)
    }

    /// The `(delta_sq, tw)` split used by [`GaussianState`]:
    /// `imag_part = hbar * tw / (2 m)`.
    pub fn from_parts(delta_sq: f64, tw: f64, mass: f64, hbar: f64) -> Self {
        ComplexLinewidth { real_part: delta_sq, imag_part: hbar * tw / (2.0 * mass) }
    }

    pub fn tw(&self, mass: f64, hbar: f64) -> f64 {
        2.0 * mass * self.imag_part / hbar
    }
}

/// A Gaussian wave-packet motional state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mass: f64,
    hbar: f64,
    x_center: f64,
    mean_momentum: f64,
    delta_sq: f64,
    tw: f64,
    phase: Option<f64>,
}

/// Result of sampling a state on a grid, with a coverage diagnostic.
#[derive(Debug, Clone)]
pub struct WaveSamples {
    pub amps: Vec<C64>,
    /// True when the grid spans at least +-6 spreadings around the center.
    pub adequate_coverage: bool,
}

impl GaussianState {
    /// Build a validated state. `phase = None` marks the global phase as
    /// untracked.
    pub fn new(
        mass: f64,
        hbar: f64,
        x_center: f64,
        mean_momentum: f64,
        delta_sq: f64,
        tw: f64,
        phase: Option<f64>,
    ) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Domain(format!("mass must be positive, got {mass}")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
        }
        if !(delta_sq > 0.0) || !delta_sq.is_finite() {
            return Err(Error::Domain(format!(
                "delta_sq (real linewidth part) must be positive, got {delta_sq}"
            )));
        }
        for (name, v) in [("x_center", x_center), ("mean_momentum", mean_momentum), ("tw", tw)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(GaussianState { mass, hbar, x_center, mean_momentum, delta_sq, tw, phase })
    }

    /// Ground state of a harmonic trap of frequency `omega`:
    /// `delta_sq = hbar / (2 m omega)`, at rest at the origin.
    pub fn trap_ground(mass: f64, hbar: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("omega must be positive, got {omega}")));
        }
        GaussianState::new(mass, hbar, 0.0, 0.0, hbar / (2.0 * mass * omega), 0.0, Some(0.0))
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn x_center(&self) -> f64 {
        self.x_center
    }
    pub fn mean_momentum(&self) -> f64 {
        self.mean_momentum
    }
    pub fn delta_sq(&self) -> f64 {
        self.delta_sq
    }
    pub fn tw(&self) -> f64 {
        self.tw
    }
    /// Global phase in radians, `None` when untracked.
    pub fn phase(&self) -> Option<f64> {
        self.phase
    }

    pub fn with_phase(&self, phase: Option<f64>) -> Self {
        let mut s = self.clone();
        s.phase = phase;
        s
    }

    /// Complex linewidth `W = delta_sq + i hbar tw / (2 m)`.
    pub fn linewidth(&self) -> ComplexLinewidth {
        ComplexLinewidth::from_parts(self.delta_sq, self.tw, self.mass, self.hbar)
    }

    pub fn w(&self) -> C64 {
        self.linewidth().as_complex()
    }

    /// Wave-packet spreading
    /// `eps = sqrt(2 [ delta_sq + (hbar tw / (2 m sqrt(delta_sq)))^2 ])`,
    /// which satisfies `|W|^2 = delta_sq * eps^2 / 2`.
    pub fn spreading(&self) -> f64 {
        let q = self.hbar * self.tw / (2.0 * self.mass * self.delta_sq.sqrt());
        (2.0 * (self.delta_sq + q * q)).sqrt()
    }

    /// Sample the wavefunction on a uniform grid.
    pub fn sample(&self, grid: &[f64]) -> Result<WaveSamples> {
        if grid.is_empty() {
            return Err(Error::Domain("sample: empty grid".into()));
        }
        if grid.len() > 1 {
            let dx = grid[1] - grid[0];
            if dx <= 0.0 {
                return Err(Error::Domain("sample: grid must be increasing".into()));
            }
            let uniform = grid
                .windows(2)
                .all(|w| ((w[1] - w[0]) - dx).abs() <= 1e-9 * dx.abs().max(1e-300));
            if !uniform {
                return Err(Error::Domain("sample: grid must be uniform".into()));
            }
        }
        let eps = self.spreading();
        let adequate_coverage = grid[0] <= self.x_center - 6.0 * eps
            && grid[grid.len() - 1] >= self.x_center + 6.0 * eps;
        let w = self.w();
        let pref = (self.delta_sq / (2.0 * PI)).powf(0.25) * (C64::new(1.0, 0.0) / w).sqrt();
        let phase = C64::new(0.0, self.phase.unwrap_or(0.0)).exp();
        let amps = grid
            .iter()
            .map(|&x| {
                let d = x - self.x_center;
                phase
                    * pref
                    * (-(d * d) / (4.0 * w)).exp()
                    * C64::new(0.0, self.mean_momentum * x / self.hbar).exp()
            })
            .collect();
        Ok(WaveSamples { amps, adequate_coverage })
    }

    /// Closed-form inner product `<self|other>` (self enters conjugated).
    pub fn overlap(&self, other: &GaussianState) -> Result<C64> {
        if self.mass != other.mass || self.hbar != other.hbar {
            return Err(Error::Domain("overlap: mismatched mass or hbar".into()));
        }
        let hbar = self.hbar;
        let wa = self.w().conj();
        let wb = other.w();
        let na = (self.delta_sq / (2.0 * PI)).powf(0.25) * (C64::new(1.0, 0.0) / self.w()).sqrt();
        let nb = (other.delta_sq / (2.0 * PI)).powf(0.25) * (C64::new(1.0, 0.0) / wb).sqrt();
        // integrand: exp(-a x^2 + b x + c)
        let a = 1.0 / (4.0 * wa) + 1.0 / (4.0 * wb);
        let b = C64::new(self.x_center, 0.0) / (2.0 * wa)
            + C64::new(other.x_center, 0.0) / (2.0 * wb)
            + C64::new(0.0, (other.mean_momentum - self.mean_momentum) / hbar);
        let c = -C64::new(self.x_center * self.x_center, 0.0) / (4.0 * wa)
            - C64::new(other.x_center * other.x_center, 0.0) / (4.0 * wb);
        let phase = match (self.phase, other.phase) {
            (Some(pa), Some(pb)) => C64::new(0.0, pb - pa).exp(),
            _ => C64::new(1.0, 0.0),
        };
        Ok(phase * na.conj() * nb * c.exp() * gaussian_integral(a, b)?)
    }

    /// `|<self|other>|`, insensitive to either state's global phase.
    pub fn fidelity(&self, other: &GaussianState) -> Result<f64> {
        Ok(self.overlap(other)?.norm())
    }

    /// Parameter-level equality up to global phase.
    pub fn approx_eq_up_to_phase(&self, other: &GaussianState, tol: f64) -> bool {
        self.mass == other.mass
            && self.hbar == other.hbar
            && (self.x_center - other.x_center).abs() <= tol
            && (self.mean_momentum - other.mean_momentum).abs() <= tol
            && (self.delta_sq - other.delta_sq).abs() <= tol
            && (self.tw - other.tw).abs() <= tol
    }
}

/// `int dx exp(-a x^2 + b x) = sqrt(pi / a) exp(b^2 / 4a)` on the principal
/// branch.
///
/// `Re(a) > 0` is the convergent case. `Re(a) = 0` with `Im(a) != 0` is the
/// Fresnel case, accepted by analytic continuation on the same branch.
pub fn gaussian_integral(a: C64, b: C64) -> Result<C64> {
    if a == C64::new(0.0, 0.0) {
        return Err(Error::Domain("gaussian_integral: a = 0".into()));
    }
    if a.re < 0.0 {
        return Err(Error::Domain(format!(
            "gaussian_integral: divergent for Re(a) = {} < 0",
            a.re
        )));
    }
    Ok((C64::new(PI, 0.0) / a).sqrt() * (b * b / (4.0 * a)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_width() {
        // (dx)^2 = hbar / (2 m omega) = 0.5 for hbar = m = omega = 1
        let s = GaussianState::trap_ground(1.0, 1.0, 1.0).unwrap();
        assert_eq!(s.delta_sq(), 0.5);
        assert_eq!(s.tw(), 0.0);
        // spreading of a pure real linewidth: eps = sqrt(2 delta_sq)
        assert!((s.spreading() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GaussianState::new(1.0, 1.0, 0.0, 0.0, -1.0, 0.0, None).is_err());
        assert!(GaussianState::new(0.0, 1.0, 0.0, 0.0, 0.5, 0.0, None).is_err());
        assert!(GaussianState::new(1.0, -1.0, 0.0, 0.0, 0.5, 0.0, None).is_err());
    }

    #[test]
    fn spreading_with_imaginary_linewidth() {
        // eps = sqrt(2 (0.5 + (2 / (2 sqrt(0.5)))^2)) = sqrt(5)
        let s = GaussianState::new(1.0, 1.0, 0.0, 0.0, 0.5, 2.0, Some(0.0)).unwrap();
        assert!((s.spreading() - 5f64.sqrt()).abs() < 1e-14);
        // |W|^2 = delta_sq eps^2 / 2
        let w = s.w();
        assert!((w.norm_sqr() - 0.5 * s.delta_sq() * s.spreading().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn sample_norm_and_momentum() {
        let s = GaussianState::new(1.0, 1.0, 0.3, 2.0, 0.5, 0.4, Some(0.0)).unwrap();
        let n = 2048usize;
        let grid: Vec<f64> = (0..n).map(|i| -12.0 + 24.0 * i as f64 / (n - 1) as f64).collect();
        let dx = grid[1] - grid[0];
        let out = s.sample(&grid).unwrap();
        assert!(out.adequate_coverage);
        let norm: f64 = out.amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
        assert!((norm - 1.0).abs() < 1e-10, "norm {norm}");
    }

    #[test]
    fn sample_rejects_empty_grid() {
        let s = GaussianState::trap_ground(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(s.sample(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn broader_density_needs_nonzero_tw() {
        let a = GaussianState::new(1.0, 1.0, 0.0, 0.0, 0.5, 0.0, None).unwrap();
        let b = GaussianState::new(1.0, 1.0, 0.0, 0.0, 0.5, 1.5, None).unwrap();
        assert!(b.spreading() > a.spreading());
        // |psi(0)|^2 drops when the packet broadens
        let g = [0.0f64];
        // single-point "grid" is fine for evaluating the density shape
        let pa = a.sample(&g).unwrap().amps[0].norm_sqr();
        let pb = b.sample(&g).unwrap().amps[0].norm_sqr();
        assert!(pb < pa);
    }

    #[test]
    fn self_overlap_is_unimodular() {
        let s = GaussianState::new(1.3, 0.7, -0.4, 1.1, 0.8, -0.6, Some(0.2)).unwrap();
        let o = s.overlap(&s).unwrap();
        assert!((o.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distant_packets_do_not_overlap() {
        // equal real widths separated by d: |<a|b>| = exp(-d^2 / (8 dx^2))
        let a = GaussianState::new(1.0, 1.0, 0.0, 0.0, 0.5, 0.0, None).unwrap();
        let shift = 10.0 * 0.5f64.sqrt();
        let b = GaussianState::new(1.0, 1.0, shift, 0.0, 0.5, 0.0, None).unwrap();
        let o = a.overlap(&b).unwrap().norm();
        assert!((o - (-12.5f64).exp()).abs() < 1e-18);
        assert!(o.powi(2) < 1e-10); // overlap probability is negligible
        let far = GaussianState::new(1.0, 1.0, 15.0 * 0.5f64.sqrt(), 0.0, 0.5, 0.0, None).unwrap();
        assert!(a.overlap(&far).unwrap().norm() < 1e-10);
    }

    #[test]
    fn overlap_rejects_mismatched_units() {
        let a = GaussianState::trap_ground(1.0, 1.0, 1.0).unwrap();
        let b = GaussianState::trap_ground(2.0, 1.0, 1.0).unwrap();
        assert!(a.overlap(&b).is_err());
    }

    #[test]
    fn overlap_matches_grid_quadrature() {
        let a = GaussianState::new(1.0, 1.0, 0.2, 0.7, 0.6, 0.3, Some(0.15)).unwrap();
        let b = GaussianState::new(1.0, 1.0, -0.5, -0.2, 0.4, -0.8, Some(-0.4)).unwrap();
        let n = 4096usize;
        let grid: Vec<f64> = (0..n).map(|i| -20.0 + 40.0 * i as f64 / (n - 1) as f64).collect();
        let dx = grid[1] - grid[0];
        let sa = a.sample(&grid).unwrap().amps;
        let sb = b.sample(&grid).unwrap().amps;
        let quad: C64 = sa.iter().zip(&sb).map(|(x, y)| x.conj() * y).sum::<C64>() * dx;
        let closed = a.overlap(&b).unwrap();
        assert!((quad - closed).norm() < 1e-8, "delta {}", (quad - closed).norm());
    }

    #[test]
    fn gaussian_integral_standard_values() {
        let v = gaussian_integral(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert!((v - C64::new(PI.sqrt(), 0.0)).norm() < 1e-14);
        let v = gaussian_integral(C64::new(1.0, 0.0), C64::new(2.0, 0.0)).unwrap();
        assert!((v - C64::new(PI.sqrt() * 1f64.exp(), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn gaussian_integral_fresnel_branch() {
        // a = i: sqrt(pi/i) = sqrt(pi) e^{-i pi/4}
        let v = gaussian_integral(C64::new(0.0, 1.0), C64::new(0.0, 0.0)).unwrap();
        let expect = C64::from_polar(PI.sqrt(), -PI / 4.0);
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn gaussian_integral_rejects_zero() {
        assert!(gaussian_integral(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn gaussian_integral_vs_quadrature() {
        // moderate complex parameters against direct numeric integration
        let cases = [
            (C64::new(0.7, 0.3), C64::new(0.4, -1.1)),
            (C64::new(2.5, -1.0), C64::new(-0.3, 0.8)),
            (C64::new(0.2, 0.0), C64::new(1.0, 1.0)),
        ];
        for (a, b) in cases {
            let closed = gaussian_integral(a, b).unwrap();
            let lim = 40.0;
            let num = crate::quad::integrate_complex(
                |x| (-a * x * x + b * x).exp(),
                -lim,
                lim,
                1e-12,
            )
            .unwrap();
            assert!((closed - num).norm() < 1e-8, "a={a} b={b}");
        }
    }
}
