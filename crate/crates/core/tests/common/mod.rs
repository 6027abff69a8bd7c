//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use lchs::linalg::{CMat, CVec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `eps`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, eps, 50)
}

/// Complex adaptive Simpson, real and imaginary parts separately, on
/// `pieces` equal subintervals.
pub fn simpson_c<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    pieces: usize,
    eps: f64,
) -> Complex64 {
    let h = (b - a) / pieces as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..pieces {
        let lo = a + h * i as f64;
        let hi = lo + h;
        let e = eps / pieces as f64;
        s += Complex64::new(
            simpson(&|x| f(x).re, lo, hi, e),
            simpson(&|x| f(x).im, lo, hi, e),
        );
    }
    s
}

/// `e^M` by its Taylor series (60 terms), with compensated summation.
pub fn taylor_expm(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut sum = CMat::identity(n, n);
    let mut comp = CMat::zeros(n, n);
    let mut term = CMat::identity(n, n);
    for j in 1..=60 {
        term = &term * m / Complex64::new(j as f64, 0.0);
        let y = &term - &comp;
        let t = &sum + &y;
        comp = (&t - &sum) - y;
        sum = t;
    }
    sum
}

/// Classical RK4 for `u' = -A u` with `steps` equal steps.
pub fn rk4(a: &CMat, u0: &CVec, t: f64, steps: usize) -> CVec {
    let h = t / steps as f64;
    let minus_a = a * Complex64::new(-1.0, 0.0);
    let f = |u: &CVec| &minus_a * u;
    let mut u = u0.clone();
    let hc = Complex64::new(h, 0.0);
    for _ in 0..steps {
        let k1 = f(&u);
        let k2 = f(&(&u + &k1 * (hc * 0.5)));
        let k3 = f(&(&u + &k2 * (hc * 0.5)));
        let k4 = f(&(&u + &k3 * hc));
        u += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0);
    }
    u
}

/// Propagator column by column from [`rk4`].
pub fn rk4_propagator(a: &CMat, t: f64, steps: usize) -> CMat {
    let n = a.nrows();
    let mut out = CMat::zeros(n, n);
    for j in 0..n {
        let mut e = CVec::zeros(n);
        e[j] = Complex64::new(1.0, 0.0);
        out.set_column(j, &rk4(a, &e, t, steps));
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = random_matrix(rng, n, 1.0);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Largest singular value via a dense SVD (independent of power iteration).
pub fn svd_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Glue bump `exp(-1/(y(1-y))^m)` without any rescaling.
pub fn bump(y: f64, m: u32) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        (-1.0 / (y * (1.0 - y)).powi(m as i32)).exp()
    }
}

/// `integral_0^1 bump`, the reciprocal of the glue normalization.
pub fn bump_total(m: u32) -> f64 {
    boole(&|p| bump(p, m), 0.0, 1.0, 1 << 16)
}

/// `psi(y)` given a precomputed [`bump_total`].
pub fn psi_with_total(y: f64, m: u32, total: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    boole(&|p| bump(p, m), 0.0, y, 1 << 16) / total
}

/// Composite Boole rule on `4 * blocks` uniform intervals.
pub fn boole<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, blocks: usize) -> f64 {
    let h = (b - a) / (4 * blocks) as f64;
    let mut sum = 0.0;
    for j in 0..blocks {
        let x = a + 4.0 * h * j as f64;
        sum += 7.0 * f(x)
            + 32.0 * f(x + h)
            + 12.0 * f(x + 2.0 * h)
            + 32.0 * f(x + 3.0 * h)
            + 7.0 * f(x + 4.0 * h);
    }
    sum * 2.0 * h / 45.0
}
