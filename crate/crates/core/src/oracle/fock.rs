//! Dense propagation in a truncated number basis, with up to three internal
//! levels. Time dependence is handled by piecewise-constant midpoint
//! segmentation; each segment applies `exp(-i H dt/hbar)` to the state
//! vector by a scaled Taylor expansion.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::coef::Coef;
use crate::error::{Error, Result};
use crate::linalg;
use crate::state::GaussianState;

use super::grid::{GridSpec, GridState};

/// Truncated-Fock state: `amps[level][n]` in the number basis of the
/// reference oscillator `(mass, hbar, omega)`.
#[derive(Debug, Clone)]
pub struct FockState {
    pub mass: f64,
    pub hbar: f64,
    pub omega: f64,
    pub amps: Vec<Vec<C64>>,
}

impl FockState {
    pub fn vacuum(mass: f64, hbar: f64, omega: f64, n: usize, level: usize, levels: usize) -> Self {
        let mut amps = vec![vec![C64::new(0.0, 0.0); n]; levels];
        amps[level][0] = C64::new(1.0, 0.0);
        FockState { mass, hbar, omega, amps }
    }

    /// Coherent state `|alpha>` truncated to `n` levels.
    pub fn coherent(
        mass: f64,
        hbar: f64,
        omega: f64,
        alpha: C64,
        n: usize,
        level: usize,
        levels: usize,
    ) -> Self {
        let mut amps = vec![vec![C64::new(0.0, 0.0); n]; levels];
        let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for k in 0..n {
            amps[level][k] = c;
            c = c * alpha / C64::new(((k + 1) as f64).sqrt(), 0.0);
        }
        let mut s = FockState { mass, hbar, omega, amps };
        s.renormalize();
        s
    }

    /// Project a Gaussian state onto the number basis by grid quadrature.
    pub fn from_gaussian(
        s: &GaussianState,
        omega: f64,
        n: usize,
        level: usize,
        levels: usize,
    ) -> Result<Self> {
        let spec = GridSpec::for_state(s, 10.0, 32)?;
        let xs = spec.points();
        let dx = spec.dx();
        let samples = s.sample(&xs)?.amps;
        let phi = hermite_functions(&xs, s.mass(), s.hbar(), omega, n);
        let mut amps = vec![vec![C64::new(0.0, 0.0); n]; levels];
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (j, amp) in samples.iter().enumerate() {
                acc += phi[k][j] * amp;
            }
            amps[level][k] = acc * dx;
        }
        let tail: f64 = amps[level][n.saturating_sub(2)..]
            .iter()
            .map(|z| z.norm_sqr())
            .sum();
        if tail > 1e-10 {
            return Err(Error::Resolution(format!(
                "gaussian needs more than {n} number states (tail {tail:.3e}); \
                 suggest n >= {}",
                n + 20
            )));
        }
        let mut st = FockState { mass: s.mass(), hbar: s.hbar(), omega, amps };
        st.renormalize();
        Ok(st)
    }

    pub fn n_max(&self) -> usize {
        self.amps[0].len()
    }

    pub fn levels(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
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
        self.amps[level].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Population in the top two number states, summed over levels.
    pub fn tail_population(&self) -> f64 {
        let n = self.n_max();
        self.amps
            .iter()
            .map(|a| a[n.saturating_sub(2)..].iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn inner(&self, other: &FockState) -> Result<C64> {
        if self.n_max() != other.n_max() || self.levels() != other.levels() {
            return Err(Error::Domain("fock states live on different spaces".into()));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(&other.amps) {
            for (x, y) in a.iter().zip(b) {
                acc += x.conj() * y;
            }
        }
        Ok(acc)
    }

    /// `<a>` restricted to one internal level (normalized within the level).
    fn ladder_expect(&self, level: usize) -> (C64, C64, f64, f64) {
        let a = &self.amps[level];
        let n = a.len();
        let mut ea = C64::new(0.0, 0.0);
        let mut ea2 = C64::new(0.0, 0.0);
        let mut en = 0.0;
        let mut pop = 0.0;
        for k in 0..n {
            pop += a[k].norm_sqr();
            en += k as f64 * a[k].norm_sqr();
            if k + 1 < n {
                ea += a[k].conj() * C64::new(((k + 1) as f64).sqrt(), 0.0) * a[k + 1];
            }
            if k + 2 < n {
                ea2 += a[k].conj()
                    * C64::new((((k + 1) * (k + 2)) as f64).sqrt(), 0.0)
                    * a[k + 2];
            }
        }
        (ea / pop, ea2 / pop, en / pop, pop)
    }

    /// Exact first and second moments `(x, p, var_x, var_p, cov_sym)` of one
    /// internal level's motional state.
    pub fn moments(&self, level: usize) -> MotionalMoments {
        let (ea, ea2, en, pop) = self.ladder_expect(level);
        let x0 = (self.hbar / (2.0 * self.mass * self.omega)).sqrt();
        let p0 = (self.mass * self.hbar * self.omega / 2.0).sqrt();
        let x = 2.0 * x0 * ea.re;
        let p = 2.0 * p0 * ea.im;
        let x2 = x0 * x0 * (2.0 * ea2.re + 2.0 * en + 1.0);
        let p2 = p0 * p0 * (2.0 * en + 1.0 - 2.0 * ea2.re);
        let cov = self.hbar * ea2.im;
        MotionalMoments {
            x,
            p,
            var_x: x2 - x * x,
            var_p: p2 - p * p,
            cov_sym: cov - x * p,
            population: pop,
            mean_n: en,
        }
    }

    /// Render one level's motional amplitude on a grid.
    pub fn to_grid(&self, spec: GridSpec, level: usize) -> GridState {
        let xs = spec.points();
        let phi = hermite_functions(&xs, self.mass, self.hbar, self.omega, self.n_max());
        let mut amp = vec![C64::new(0.0, 0.0); spec.n];
        for (k, c) in self.amps[level].iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (j, v) in amp.iter_mut().enumerate() {
                *v += c * phi[k][j];
            }
        }
        GridState { spec, mass: self.mass, hbar: self.hbar, amps: vec![amp] }
    }
}

/// Exact motional moments of a Fock-represented state.
#[derive(Debug, Clone, Copy)]
pub struct MotionalMoments {
    pub x: f64,
    pub p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_sym: f64,
    pub population: f64,
    pub mean_n: f64,
}

/// Normalized oscillator eigenfunctions `phi_n(x)` by upward recursion.
pub(crate) fn hermite_functions(
    xs: &[f64],
    mass: f64,
    hbar: f64,
    omega: f64,
    n: usize,
) -> Vec<Vec<f64>> {
    let scale = (mass * omega / hbar).sqrt();
    let norm0 = (mass * omega / (std::f64::consts::PI * hbar)).powf(0.25);
    let mut out = vec![vec![0.0; xs.len()]; n];
    for (j, &x) in xs.iter().enumerate() {
        let xi = scale * x;
        let phi0 = norm0 * (-xi * xi / 2.0).exp();
        out[0][j] = phi0;
        if n > 1 {
            out[1][j] = 2f64.sqrt() * xi * phi0;
        }
        for k in 2..n {
            out[k][j] = (2.0 / k as f64).sqrt() * xi * out[k - 1][j]
                - ((k as f64 - 1.0) / k as f64).sqrt() * out[k - 2][j];
        }
    }
    out
}

/// Hamiltonian specification acting on a [`FockState`]:
/// `H = p^2/2m + b(t)(px+xp)/2 + c(t)x^2/2 + d(t)p + f(t)x (+ coupling)`.
#[derive(Debug, Clone)]
pub struct FockHamiltonian {
    pub b: Coef,
    pub c: Coef,
    pub d: Coef,
    pub f: Coef,
    pub coupling: Option<FockCoupling>,
}

impl FockHamiltonian {
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        FockHamiltonian {
            b: Coef::Zero,
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

/// Internal-level coupling on the `(g0, g1, e)` space.
#[derive(Debug, Clone)]
pub enum FockCoupling {
    /// Time-independent matched drive (rotating frame, on resonance):
    /// `2 hbar rabi [ I+ e^{i k_sum x/2} e^{-i gamma} cos(k_diff x/2 - alpha) + h.c. ]
    ///  + hbar detuning I_z`.
    Matched { rabi: f64, alpha: f64, gamma: f64, k_sum: f64, k_diff: f64, detuning: f64 },
    /// Two-beam Raman drive in the frame rotating at the internal splitting:
    /// `hbar sum_l rabi_l(t) [ I+ e^{i k_l x} e^{i(delta_l t - phi_l)} + h.c. ]`.
    RotatingRaman {
        rabi0: Coef,
        rabi1: Coef,
        k0: f64,
        k1: f64,
        delta0: f64,
        delta1: f64,
        phi0: f64,
        phi1: f64,
    },
}

/// Static operator blocks reused across segments.
struct FockOps {
    x: Array2<C64>,
    p: Array2<C64>,
    kinetic: Array2<C64>,
    x2: Array2<C64>,
    xp_sym: Array2<C64>,
    exp_ik0x: Option<Array2<C64>>,
    exp_ik1x: Option<Array2<C64>>,
    matched_f: Option<Array2<C64>>,
}

fn build_ops(h: &FockHamiltonian, st: &FockState) -> Result<FockOps> {
    let n = st.n_max();
    let x0 = (st.hbar / (2.0 * st.mass * st.omega)).sqrt();
    let p0 = (st.mass * st.hbar * st.omega / 2.0).sqrt();
    let mut x: Array2<C64> = Array2::zeros((n, n));
    let mut p: Array2<C64> = Array2::zeros((n, n));
    for k in 0..n - 1 {
        let r = ((k + 1) as f64).sqrt();
        x[(k, k + 1)] = C64::new(x0 * r, 0.0);
        x[(k + 1, k)] = C64::new(x0 * r, 0.0);
        p[(k, k + 1)] = C64::new(0.0, -p0 * r);
        p[(k + 1, k)] = C64::new(0.0, p0 * r);
    }
    let p2 = linalg::matmul(&p, &p);
    let kinetic = p2.mapv(|z| z / (2.0 * st.mass));
    let x2 = linalg::matmul(&x, &x);
    let xp = linalg::matmul(&x, &p);
    let px = linalg::matmul(&p, &x);
    let xp_sym = (&xp + &px) / C64::new(2.0, 0.0);
    let (mut e0, mut e1, mut mf) = (None, None, None);
    match &h.coupling {
        Some(FockCoupling::RotatingRaman { k0, k1, .. }) => {
            e0 = Some(linalg::expm(&x.mapv(|z| C64::new(0.0, *k0) * z))?);
            e1 = Some(linalg::expm(&x.mapv(|z| C64::new(0.0, *k1) * z))?);
        }
        Some(FockCoupling::Matched { alpha, gamma, k_sum, k_diff, .. }) => {
            let es = linalg::expm(&x.mapv(|z| C64::new(0.0, 0.5 * k_sum) * z))?;
            let ed = linalg::expm(&x.mapv(|z| C64::new(0.0, 0.5 * k_diff) * z))?;
            let edd = linalg::dagger(&ed);
            let cos_op = (ed.mapv(|z| z * C64::new(0.0, -alpha).exp())
                + edd.mapv(|z| z * C64::new(0.0, *alpha).exp()))
                / C64::new(2.0, 0.0);
            let f = linalg::matmul(&es, &cos_op)
                .mapv(|z| z * C64::new(0.0, -gamma).exp());
            mf = Some(f);
        }
        None => {}
    }
    Ok(FockOps { x, p, kinetic, x2, xp_sym, exp_ik0x: e0, exp_ik1x: e1, matched_f: mf })
}

fn assemble(h: &FockHamiltonian, ops: &FockOps, st: &FockState, t: f64) -> Array2<C64> {
    let n = st.n_max();
    let levels = h.n_levels();
    let motional = {
        let mut m = ops.kinetic.clone();
        let bv = h.b.eval(t);
        let cv = h.c.eval(t);
        let dv = h.d.eval(t);
        let fv = h.f.eval(t);
        if bv != 0.0 {
            m = m + &ops.xp_sym.mapv(|z| z * bv);
        }
        if cv != 0.0 {
            m = m + &ops.x2.mapv(|z| z * 0.5 * cv);
        }
        if dv != 0.0 {
            m = m + &ops.p.mapv(|z| z * dv);
        }
        if fv != 0.0 {
            m = m + &ops.x.mapv(|z| z * fv);
        }
        m
    };
    if levels == 1 {
        return motional;
    }
    let dim = levels * n;
    let mut big: Array2<C64> = Array2::zeros((dim, dim));
    for l in 0..levels {
        for i in 0..n {
            for j in 0..n {
                big[(l * n + i, l * n + j)] = motional[(i, j)];
            }
        }
    }
    // coupling block between g0 (level 0) and e (level 2): <e|H|g0>
    let hbar = st.hbar;
    let block = match h.coupling.as_ref().unwrap() {
        FockCoupling::Matched { rabi, detuning, .. } => {
            // hbar * detuning * I_z = diag(-1/2 on g0, 0 on g1, +1/2 on e)
            if *detuning != 0.0 {
                for i in 0..n {
                    big[(i, i)] -= C64::new(0.5 * hbar * detuning, 0.0);
                    big[(2 * n + i, 2 * n + i)] += C64::new(0.5 * hbar * detuning, 0.0);
                }
            }
            let f = ops.matched_f.as_ref().unwrap();
            f.mapv(|z| z * 2.0 * hbar * rabi)
        }
        FockCoupling::RotatingRaman { rabi0, rabi1, delta0, delta1, phi0, phi1, .. } => {
            let e0 = ops.exp_ik0x.as_ref().unwrap();
            let e1 = ops.exp_ik1x.as_ref().unwrap();
            let c0 = C64::new(0.0, delta0 * t - phi0).exp() * hbar * rabi0.eval(t);
            let c1 = C64::new(0.0, delta1 * t - phi1).exp() * hbar * rabi1.eval(t);
            e0.mapv(|z| z * c0) + &e1.mapv(|z| z * c1)
        }
    };
    for i in 0..n {
        for j in 0..n {
            big[(2 * n + i, j)] = block[(i, j)];
            big[(j, 2 * n + i)] = block[(i, j)].conj();
        }
    }
    big
}

/// Propagate over `t_total` in `segments` piecewise-constant midpoint steps.
pub fn fock_evolve(
    h: &FockHamiltonian,
    psi0: &FockState,
    t_total: f64,
    segments: usize,
) -> Result<FockState> {
    if !(t_total > 0.0) || segments == 0 {
        return Err(Error::Domain("fock_evolve: t_total and segments must be positive".into()));
    }
    if psi0.levels() != h.n_levels() {
        return Err(Error::Domain(format!(
            "state has {} levels but Hamiltonian wants {}",
            psi0.levels(),
            h.n_levels()
        )));
    }
    let ops = build_ops(h, psi0)?;
    let n = psi0.n_max();
    let levels = psi0.levels();
    let mut vec: Vec<C64> = psi0.amps.iter().flatten().copied().collect();
    let dt = t_total / segments as f64;
    let time_independent = matches!(
        (&h.b, &h.c, &h.d, &h.f),
        (Coef::Zero | Coef::Const(_), Coef::Zero | Coef::Const(_), Coef::Zero | Coef::Const(_), Coef::Zero | Coef::Const(_))
    ) && !matches!(h.coupling, Some(FockCoupling::RotatingRaman { .. }));
    let mut cached: Option<Array2<C64>> = None;
    for s in 0..segments {
        let tm = (s as f64 + 0.5) * dt;
        let hmat = if time_independent {
            if cached.is_none() {
                cached = Some(assemble(h, &ops, psi0, tm));
            }
            cached.as_ref().unwrap()
        } else {
            cached = Some(assemble(h, &ops, psi0, tm));
            cached.as_ref().unwrap()
        };
        vec = linalg::exp_i_h_t_apply(hmat, -dt / psi0.hbar, &vec)?;
        let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-11 * (s as f64 + 1.0).max(100.0) {
            return Err(Error::Numeric(format!(
                "fock_evolve: norm drifted to {norm} at segment {s}"
            )));
        }
    }
    let amps: Vec<Vec<C64>> = (0..levels).map(|l| vec[l * n..(l + 1) * n].to_vec()).collect();
    let out = FockState { mass: psi0.mass, hbar: psi0.hbar, omega: psi0.omega, amps };
    let tail = out.tail_population();
    if tail > 1e-8 {
        return Err(Error::Resolution(format!(
            "truncation tail {tail:.3e} after evolution; suggest n >= {}",
            n + n / 2
        )));
    }
    Ok(out)
}

/// [`fock_evolve`] plus a Richardson check at doubled segmentation; returns
/// the refined state and the fidelity deficit between the two runs.
pub fn fock_evolve_checked(
    h: &FockHamiltonian,
    psi0: &FockState,
    t_total: f64,
    segments: usize,
) -> Result<(FockState, f64)> {
    let coarse = fock_evolve(h, psi0, t_total, segments)?;
    let fine = fock_evolve(h, psi0, t_total, 2 * segments)?;
    let fid = coarse.inner(&fine)?.norm();
    Ok((fine, (1.0 - fid).abs()))
}
