//! Adaptive Simpson quadrature over real intervals, for real- and
//! complex-valued integrands.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 40;

// Oscillatory integrands can alias to zero at the coarse sample points and
// terminate the refinement prematurely; always start from a fixed panelling.
const INITIAL_PANELS: usize = 16;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let panel_tol = tol / INITIAL_PANELS as f64;
    for i in 0..INITIAL_PANELS {
        let pa = a + (b - a) * i as f64 / INITIAL_PANELS as f64;
        let pb = a + (b - a) * (i + 1) as f64 / INITIAL_PANELS as f64;
        let fa = f(pa);
        let fb = f(pb);
        let m = 0.5 * (pa + pb);
        let fm = f(m);
        let whole = simpson(pa, pb, fa, fm, fb);
        total += adaptive(&mut f, pa, pb, fa, fm, fb, whole, panel_tol, MAX_DEPTH)?;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Numeric("quadrature produced a non-finite value".into()))
    }
}

/// Integrate a complex-valued `f` over `[a, b]` to absolute tolerance `tol`
/// (applied to real and imaginary parts jointly through the modulus).
pub fn integrate_complex<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    let panel_tol = tol / INITIAL_PANELS as f64;
    for i in 0..INITIAL_PANELS {
        let pa = a + (b - a) * i as f64 / INITIAL_PANELS as f64;
        let pb = a + (b - a) * (i + 1) as f64 / INITIAL_PANELS as f64;
        let fa = f(pa);
        let fb = f(pb);
        let m = 0.5 * (pa + pb);
        let fm = f(m);
        let whole = simpson_c(pa, pb, fa, fm, fb);
        total += adaptive_c(&mut f, pa, pb, fa, fm, fb, whole, panel_tol, MAX_DEPTH)?;
    }
    if total.re.is_finite() && total.im.is_finite() {
        Ok(total)
    } else {
        Err(Error::Numeric("quadrature produced a non-finite value".into()))
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn simpson_c(a: f64, b: f64, fa: C64, fm: C64, fb: C64) -> C64 {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // rounding floor: once the refinement difference is dominated by f64
    // noise on this panel, further subdivision cannot help
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs() + (b - a).abs() * fm.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= floor || (b - a).abs() < f64::EPSILON * 16.0 {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "adaptive quadrature failed to converge; achieved ~{:.3e}",
            delta.abs() / 15.0
        )));
    }
    let l = adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_c<F: FnMut(f64) -> C64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: C64,
    fm: C64,
    fb: C64,
    whole: C64,
    tol: f64,
    depth: u32,
) -> Result<C64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_c(a, m, fa, flm, fm);
    let right = simpson_c(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let floor = 64.0 * f64::EPSILON * (left.norm() + right.norm() + (b - a).abs() * fm.norm());
    if delta.norm() <= 15.0 * tol || delta.norm() <= floor || (b - a).abs() < f64::EPSILON * 16.0 {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "adaptive quadrature failed to converge; achieved ~{:.3e}",
            delta.norm() / 15.0
        )));
    }
    let l = adaptive_c(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = adaptive_c(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}
