//! Small dense complex linear algebra: products, norms, and the matrix
//! exponential via Pade approximation with scaling and squaring.
//!
//! Matrices here are at most a few hundred rows (truncated Fock spaces), so
//! everything is dense `ndarray` storage with no external BLAS.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b)
}

pub fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum absolute column sum.
pub fn norm_1(a: &Array2<C64>) -> f64 {
    let (n, m) = a.dim();
    (0..m)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let ad = dagger(a);
    let d = a - &ad;
    let scale = frobenius(a).max(1.0);
    frobenius(&d) / scale
}

pub fn trace(a: &Array2<C64>) -> C64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Frobenius distance between two unitaries minimized over a global phase.
/// The optimal phase is `arg tr(v^+ u)`; the difference is then formed
/// elementwise, which stays accurate down to machine precision where the
/// trace identity `sqrt(2n - 2|tr|)` would cancel catastrophically.
pub fn phase_insensitive_distance(u: &Array2<C64>, v: &Array2<C64>) -> f64 {
    let t = trace(&matmul(&dagger(v), u));
    let phase = if t.norm() > 0.0 { t / t.norm() } else { C64::new(1.0, 0.0) };
    let mut acc = 0.0;
    for (a, b) in u.iter().zip(v.iter()) {
        acc += (a - phase * b).norm_sqr();
    }
    acc.sqrt()
}

/// Solve `A X = B` by LU with partial pivoting. `A` is consumed.
pub fn solve(mut a: Array2<C64>, mut b: Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Internal("solve: dimension mismatch".into()));
    }
    let m = b.ncols();
    for k in 0..n {
        // pivot
        let mut piv = k;
        let mut best = a[(k, k)].norm();
        for i in (k + 1)..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Err(Error::Numeric("solve: singular matrix".into()));
        }
        if piv != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = t;
            }
            for j in 0..m {
                let t = b[(k, j)];
                b[(k, j)] = b[(piv, j)];
                b[(piv, j)] = t;
            }
        }
        let akk = a[(k, k)];
        for i in (k + 1)..n {
            let f = a[(i, k)] / akk;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            a[(i, k)] = f;
            for j in (k + 1)..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
            for j in 0..m {
                let v = b[(k, j)];
                b[(i, j)] -= f * v;
            }
        }
    }
    // back substitution
    for j in 0..m {
        for i in (0..n).rev() {
            let mut s = b[(i, j)];
            for k in (i + 1)..n {
                s -= a[(i, k)] * b[(k, j)];
            }
            b[(i, j)] = s / a[(i, i)];
        }
    }
    Ok(b)
}

// Pade coefficient tables and scaling thresholds (Higham 2005).
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

fn pade_coeffs(m: usize) -> &'static [f64] {
    match m {
        3 => &[120., 60., 12., 1.],
        5 => &[30240., 15120., 3360., 420., 30., 1.],
        7 => &[17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.],
        9 => &[
            17643225600.,
            8821612800.,
            2075673600.,
            302702400.,
            30270240.,
            2162160.,
            110880.,
            3960.,
            90.,
            1.,
        ],
        13 => &[
            64764752532480000.,
            32382376266240000.,
            7771770303897600.,
            1187353796428800.,
            129060195264000.,
            10559470521600.,
            670442572800.,
            33522128640.,
            1323241920.,
            40840800.,
            960960.,
            16380.,
            182.,
            1.,
        ],
        _ => unreachable!(),
    }
}

fn pade_uv(a: &Array2<C64>, m: usize) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let b = pade_coeffs(m);
    let a2 = matmul(a, a);
    if m == 13 {
        let a4 = matmul(&a2, &a2);
        let a6 = matmul(&a4, &a2);
        let w1 = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
        let w2 = &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &(identity(n) * b[1]);
        let u = matmul(a, &(matmul(&a6, &w1) + &w2));
        let z1 = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
        let z2 = &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &(identity(n) * b[0]);
        let v = matmul(&a6, &z1) + &z2;
        return (u, v);
    }
    // odd part: A * sum b[2k+1] A^{2k} ; even part: sum b[2k] A^{2k}
    let mut u_poly = identity(n) * b[1];
    let mut v = identity(n) * b[0];
    let mut a2k = identity(n);
    for k in 1..=(m / 2) {
        a2k = matmul(&a2k, &a2);
        u_poly = u_poly + &(&a2k * b[2 * k + 1]);
        v = v + &(&a2k * b[2 * k]);
    }
    (matmul(a, &u_poly), v)
}

/// Matrix exponential `exp(A)` by scaling-and-squaring Pade approximation.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Internal("expm: matrix must be square".into()));
    }
    let nrm = norm_1(a);
    if !nrm.is_finite() {
        return Err(Error::Numeric("expm: non-finite input".into()));
    }
    for &(m, theta) in &THETA[..4] {
        if nrm <= theta {
            let (u, v) = pade_uv(a, m);
            return solve(&v - &u, &v + &u);
        }
    }
    let theta13 = THETA[4].1;
    let s = if nrm > theta13 {
        (nrm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / C64::new(2f64.powi(s), 0.0);
    let (u, v) = pade_uv(&scaled, 13);
    let mut x = solve(&v - &u, &v + &u)?;
    for _ in 0..s {
        x = matmul(&x, &x);
    }
    Ok(x)
}

/// `exp(i H t) |psi>` for Hermitian `h`, by scaled Taylor series applied to
/// the vector. Cheaper than `expm` when only the action is needed.
pub fn exp_i_h_t_apply(h: &Array2<C64>, t: f64, psi: &[C64]) -> Result<Vec<C64>> {
    let n = h.nrows();
    if psi.len() != n {
        return Err(Error::Internal("exp apply: dimension mismatch".into()));
    }
    let nrm = norm_1(h) * t.abs();
    let steps = (nrm / 0.5).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut out = psi.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); n];
    for _ in 0..steps {
        let mut acc = out.clone();
        let mut cur = out.clone();
        // Taylor: sum_k (i tau H)^k / k!
        for k in 1..=60 {
            // term = (i tau / k) * H * cur
            for (i, ti) in term.iter_mut().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for j in 0..n {
                    s += h[(i, j)] * cur[j];
                }
                *ti = C64::new(0.0, tau / k as f64) * s;
            }
            for i in 0..n {
                acc[i] += term[i];
            }
            let tn: f64 = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if tn < 1e-18 {
                break;
            }
            std::mem::swap(&mut cur, &mut term);
            if k == 60 {
                return Err(Error::Numeric("exp apply: Taylor series did not converge".into()));
            }
        }
        out = acc;
    }
    Ok(out)
}
