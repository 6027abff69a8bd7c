//! Dense complex matrix helpers: Padé exponential, Hermitian exponential and
//! the power-iteration spectral norm.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{LchsError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Largest 1-norm accepted by [`expm_general`]; `e^{700}` is near the
/// double-precision overflow threshold.
pub const EXPM_NORM_CAP: f64 = 700.0;

/// Relative Hermiticity residual accepted as-is by [`expm_hermitian_unitary`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Residuals up to this level are symmetrized with a warning; larger ones are
/// rejected.
pub const HERMITIAN_REPAIR_TOL: f64 = 1e-8;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn require_square(m: &CMat, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(LchsError::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Maximum absolute column sum.
pub fn norm_one(m: &CMat) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value, by power iteration on `M^dagger M`
/// (at most 200 iterations, stopping at relative change `1e-12`).
pub fn spectral_norm(m: &CMat) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let frob = m.norm();
    if frob == 0.0 {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    // Fixed, generic start vector: unlikely to be orthogonal to the top mode.
    let mut x = CVec::from_fn(n, |i, _| {
        let s = (i as f64 + 1.0) * 0.754_877_666_246_692_7;
        Complex64::new(1.0 + s.fract(), 0.5 * (2.0 * s).fract())
    });
    x /= c(x.norm());
    let mut lambda = 0.0;
    for _ in 0..200 {
        let y = &gram * &x;
        let next = y.norm();
        if next == 0.0 {
            return 0.0;
        }
        x = y / c(next);
        let done = (next - lambda).abs() <= 1e-12 * next;
        lambda = next;
        if done {
            break;
        }
    }
    lambda.sqrt()
}

/// `exp(M)` by scaling and squaring around a degree-13 Padé approximant.
pub fn expm_general(m: &CMat) -> Result<CMat> {
    let n = require_square(m, "expm argument")?;
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LchsError::invalid("M", "entries must be finite"));
    }
    let norm = norm_one(m);
    if norm > EXPM_NORM_CAP {
        return Err(LchsError::Overflow {
            norm,
            cap: EXPM_NORM_CAP,
        });
    }
    let id = CMat::identity(n, n);
    if norm == 0.0 {
        return Ok(id);
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m * c(2f64.powi(-s));
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]))
        + &a6 * c(b[7])
        + &a4 * c(b[5])
        + &a2 * c(b[3])
        + &id * c(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]))
        + &a6 * c(b[6])
        + &a4 * c(b[4])
        + &a2 * c(b[2])
        + &id * c(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| LchsError::Precondition("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// `||M - M^dagger|| / ||M||` in the 1-norm (0 for the zero matrix).
pub fn hermitian_residual(m: &CMat) -> f64 {
    let scale = norm_one(m);
    if scale == 0.0 {
        return 0.0;
    }
    norm_one(&(m - m.adjoint())) / scale
}

/// Checks Hermiticity, returning the (possibly symmetrized) matrix and a
/// warning when symmetrization was needed.
pub fn hermitian_part_checked(m: &CMat) -> Result<(CMat, Option<String>)> {
    require_square(m, "Hermitian matrix")?;
    let residual = hermitian_residual(m);
    if residual <= HERMITIAN_TOL {
        Ok((m.clone(), None))
    } else if residual <= HERMITIAN_REPAIR_TOL {
        let sym = (m + m.adjoint()) * c(0.5);
        Ok((
            sym,
            Some(format!(
                "symmetrized input with Hermiticity residual {residual:.3e}"
            )),
        ))
    } else {
        Err(LchsError::NotHermitian { residual })
    }
}

/// Real eigenvalues and unitary eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(h.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `V diag(phase(lambda)) V^dagger`.
fn spectral_apply(values: &[f64], vectors: &CMat, phase: impl Fn(f64) -> Complex64) -> CMat {
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let p = phase(l);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= p);
    }
    scaled * vectors.adjoint()
}

/// `exp(-i tau H)` for Hermitian `H`, with any symmetrization warning.
pub fn expm_hermitian_unitary(h: &CMat, tau: f64) -> Result<(CMat, Option<String>)> {
    let (h, warning) = hermitian_part_checked(h)?;
    let (values, vectors) = hermitian_eigen(&h);
    let u = spectral_apply(&values, &vectors, |l| Complex64::new(0.0, -tau * l).exp());
    Ok((u, warning))
}

/// `||U^dagger U - I||` in the spectral norm.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    spectral_norm(&(u.adjoint() * u - CMat::identity(n, n)))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMat) -> f64 {
    hermitian_eigen(h)
        .0
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Sums matrices with a fixed pairwise tree, independent of thread scheduling.
pub fn pairwise_sum(mut terms: Vec<CMat>, rows: usize, cols: usize) -> CMat {
    if terms.is_empty() {
        return CMat::zeros(rows, cols);
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}
