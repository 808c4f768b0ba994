//! Gaussian fitting from moments, and analytic-vs-numeric comparison.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::state::GaussianState;

use super::grid::GridState;

/// A Gaussian fitted to numeric samples.
#[derive(Debug, Clone)]
pub struct GaussianFit {
    pub state: GaussianState,
    /// L2 distance (up to global phase) between the samples and the fit.
    pub residual: f64,
    /// False when the residual exceeds the not-Gaussian threshold 1e-3.
    pub gaussian_like: bool,
}

/// Parameter differences between a fitted state and an analytic reference.
#[derive(Debug, Clone, Copy)]
pub struct ParamDeltas {
    pub x_center: f64,
    pub mean_momentum: f64,
    pub delta_sq: f64,
    pub tw: f64,
}

/// Report of an analytic-vs-numeric comparison.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub l2_error: f64,
    /// `|<analytic|numeric>|`, insensitive to global phase.
    pub fidelity: f64,
    pub fitted: GaussianFit,
    pub deltas: ParamDeltas,
}

/// Fit a Gaussian to one internal level of a grid state.
///
/// Center and momentum come from first moments; the linewidth split uses the
/// position variance together with the symmetrized `x p` covariance (a mixed
/// position/momentum second moment): for
/// `psi ~ exp(-(r + i s)(x - x0)^2)` one has `var_x = 1/(4r)` and
/// `cov = -hbar s / (2 r)`, so `W = 1/(4(r + i s))`.
pub fn fit_gaussian(state: &GridState, level: usize) -> Result<GaussianFit> {
    if level >= state.amps.len() {
        return Err(Error::Domain(format!("level {level} out of {}", state.amps.len())));
    }
    let pop = state.level_population(level);
    if pop < 1e-12 {
        return Err(Error::Domain("selected level is unpopulated".into()));
    }
    // other levels must be negligible or explicitly selected by the caller
    let amps = &state.amps[level];
    let xs = state.spec.points();
    let dx = state.spec.dx();
    let hbar = state.hbar;

    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    let xc: f64 = xs
        .iter()
        .zip(amps)
        .map(|(&x, z)| x * z.norm_sqr())
        .sum::<f64>()
        * dx
        / norm;
    let var_x: f64 = xs
        .iter()
        .zip(amps)
        .map(|(&x, z)| (x - xc) * (x - xc) * z.norm_sqr())
        .sum::<f64>()
        * dx
        / norm;

    // p psi via spectral derivative
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(state.spec.n);
    let inv = planner.plan_fft_inverse(state.spec.n);
    let ks = state.spec.wavenumbers();
    let mut work: Vec<C64> = amps.clone();
    fwd.process(&mut work);
    let nn = state.spec.n as f64;
    for (z, &k) in work.iter_mut().zip(&ks) {
        *z *= C64::new(hbar * k / nn, 0.0);
    }
    inv.process(&mut work);

    let pbar: f64 = amps
        .iter()
        .zip(&work)
        .map(|(z, pz)| (z.conj() * pz).re)
        .sum::<f64>()
        * dx
        / norm;
    let cov: f64 = xs
        .iter()
        .zip(amps.iter().zip(&work))
        .map(|(&x, (z, pz))| ((x - xc) * z.conj() * pz).re)
        .sum::<f64>()
        * dx
        / norm;

    let r = 1.0 / (4.0 * var_x);
    let s = -2.0 * r * cov / hbar;
    let w = 1.0 / (4.0 * C64::new(r, s));
    let delta_sq = w.re;
    let tw = 2.0 * state.mass * w.im / hbar;
    if !(delta_sq > 0.0) {
        return Err(Error::Numeric(format!("fit produced delta_sq = {delta_sq}")));
    }
    let fitted = GaussianState::new(state.mass, hbar, xc, pbar, delta_sq, tw, None)?;

    // residual: L2 distance to the fitted samples after aligning the global
    // phase (elementwise, avoiding the sqrt(2 - 2|ov|) cancellation)
    let fit_samples = fitted.sample(&xs)?.amps;
    let mut ov = C64::new(0.0, 0.0);
    let mut fit_norm = 0.0;
    for (a, b) in amps.iter().zip(&fit_samples) {
        ov += b.conj() * a;
        fit_norm += b.norm_sqr();
    }
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
    let scale = (norm / (fit_norm * dx)).sqrt();
    let mut acc = 0.0;
    for (a, b) in amps.iter().zip(&fit_samples) {
        acc += (a - phase * scale * b).norm_sqr();
    }
    let residual = (acc * dx).sqrt() / norm.sqrt();
    Ok(GaussianFit { state: fitted, residual, gaussian_like: residual <= 1e-3 })
}

/// Compare an analytic Gaussian against a (single-level) numeric grid state.
pub fn compare(analytic: &GaussianState, numeric: &GridState, level: usize) -> Result<ComparisonReport> {
    if analytic.mass() != numeric.mass || analytic.hbar() != numeric.hbar {
        return Err(Error::Domain("compare: mismatched mass or hbar".into()));
    }
    let xs = numeric.spec.points();
    let sampled = analytic.sample(&xs)?;
    if !sampled.adequate_coverage {
        return Err(Error::Domain(
            "compare: grid does not cover the analytic state".into(),
        ));
    }
    let dx = numeric.spec.dx();
    let mut ov = C64::new(0.0, 0.0);
    let mut l2 = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (a, b) in sampled.amps.iter().zip(&numeric.amps[level]) {
        ov += a.conj() * b;
        l2 += (a - b).norm_sqr();
        na += a.norm_sqr();
        nb += b.norm_sqr();
    }
    let fidelity = ov.norm() * dx / (na * dx).sqrt() / (nb * dx).sqrt();
    let fitted = fit_gaussian(numeric, level)?;
    let deltas = ParamDeltas {
        x_center: fitted.state.x_center() - analytic.x_center(),
        mean_momentum: fitted.state.mean_momentum() - analytic.mean_momentum(),
        delta_sq: fitted.state.delta_sq() - analytic.delta_sq(),
        tw: fitted.state.tw() - analytic.tw(),
    };
    Ok(ComparisonReport { l2_error: (l2 * dx).sqrt(), fidelity, fitted, deltas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::grid::GridSpec;

    #[test]
    fn fit_recovers_known_state() {
        let s = GaussianState::new(1.0, 1.0, 0.3, -0.7, 0.6, 0.8, Some(0.0)).unwrap();
        let spec = GridSpec::new(-20.0, 20.0, 2048).unwrap();
        let g = GridState::from_gaussian(&s, spec, 0, 1).unwrap();
        let fit = fit_gaussian(&g, 0).unwrap();
        assert!((fit.state.x_center() - 0.3).abs() < 1e-9);
        assert!((fit.state.mean_momentum() + 0.7).abs() < 1e-9);
        assert!((fit.state.delta_sq() - 0.6).abs() < 1e-9);
        assert!((fit.state.tw() - 0.8).abs() < 1e-9);
        assert!(fit.residual < 1e-10, "residual {}", fit.residual);
        assert!(fit.gaussian_like);
    }

    #[test]
    fn two_humps_are_flagged_not_gaussian() {
        let a = GaussianState::new(1.0, 1.0, -4.0, 0.0, 0.3, 0.0, Some(0.0)).unwrap();
        let b = GaussianState::new(1.0, 1.0, 4.0, 0.0, 0.3, 0.0, Some(0.0)).unwrap();
        let spec = GridSpec::new(-24.0, 24.0, 2048).unwrap();
        let xs = spec.points();
        let sa = a.sample(&xs).unwrap().amps;
        let sb = b.sample(&xs).unwrap().amps;
        let mix: Vec<C64> = sa
            .iter()
            .zip(&sb)
            .map(|(x, y)| (x + y) / C64::new(2f64.sqrt(), 0.0))
            .collect();
        let g = GridState { spec, mass: 1.0, hbar: 1.0, amps: vec![mix] };
        let fit = fit_gaussian(&g, 0).unwrap();
        assert!(!fit.gaussian_like, "residual {}", fit.residual);
    }

    #[test]
    fn compare_identical_states() {
        let s = GaussianState::new(1.0, 1.0, 0.1, 0.4, 0.5, -0.2, Some(0.0)).unwrap();
        let spec = GridSpec::new(-18.0, 18.0, 1024).unwrap();
        let g = GridState::from_gaussian(&s, spec, 0, 1).unwrap();
        let rep = compare(&s, &g, 0).unwrap();
        assert!((rep.fidelity - 1.0).abs() < 1e-12);
        assert!(rep.deltas.delta_sq.abs() < 1e-9);
    }

    #[test]
    fn compare_rejects_small_grids() {
        let s = GaussianState::new(1.0, 1.0, 0.0, 0.0, 4.0, 20.0, Some(0.0)).unwrap();
        let spec = GridSpec::new(-10.0, 10.0, 512).unwrap();
        let g = GridState {
            spec,
            mass: 1.0,
            hbar: 1.0,
            amps: vec![vec![C64::new(0.0, 0.0); 512]],
        };
        assert!(compare(&s, &g, 0).is_err());
    }
}
