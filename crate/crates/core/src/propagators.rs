//! Time-ordered propagators `T exp(-int_0^t A)` and the Hamiltonian
//! simulation unitaries `T exp(-i int_0^t (k L + H))`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LchsError, Result};
use crate::linalg::{
    expm_general, expm_hermitian_unitary, hermitian_eigen, min_eigenvalue, spectral_norm, CMat,
};

/// Steps of the midpoint product are doubled at most up to this count.
pub const MAX_STEPS: usize = 1 << 16;

/// Tolerance on the certified bound `L >= -lambda0` for constant problems.
const LAMBDA0_SLACK: f64 = 1e-10;

/// `(L, H)` with `A = L + iH`, both Hermitian.
pub fn cartesian_decompose(a: &CMat) -> Result<(CMat, CMat)> {
    if a.nrows() != a.ncols() {
        return Err(LchsError::Shape(format!(
            "coefficient matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let adj = a.adjoint();
    let l = (a + &adj) * Complex64::new(0.5, 0.0);
    let h = (a - &adj) * Complex64::new(0.0, -0.5);
    Ok((l, h))
}

pub type MatrixFn = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

#[derive(Clone)]
pub enum Coefficient {
    Constant { a: CMat, l: CMat, h: CMat },
    TimeDependent(MatrixFn),
}

/// `du/dt = -A(t) u` with a certified lower bound `L(t) >= -lambda0`.
#[derive(Clone)]
pub struct OdeProblem {
    dim: usize,
    coefficient: Coefficient,
    lambda0: f64,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.coefficient {
            Coefficient::Constant { .. } => "constant",
            Coefficient::TimeDependent(_) => "time-dependent",
        };
        f.debug_struct("OdeProblem")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .field("lambda0", &self.lambda0)
            .finish()
    }
}

impl OdeProblem {
    /// Constant coefficient; `lambda0` is checked against the spectrum of `L`.
    pub fn constant(a: CMat, lambda0: f64) -> Result<Self> {
        check_lambda0(lambda0)?;
        let (l, h) = cartesian_decompose(&a)?;
        if a.nrows() == 0 {
            return Err(LchsError::Shape("empty coefficient matrix".into()));
        }
        let min_eig = min_eigenvalue(&l);
        if min_eig < -lambda0 - LAMBDA0_SLACK {
            return Err(LchsError::Precondition(format!(
                "min eigenvalue of L is {min_eig:.6e}, below -lambda0 = {:.6e}",
                -lambda0
            )));
        }
        Ok(OdeProblem {
            dim: a.nrows(),
            coefficient: Coefficient::Constant { a, l, h },
            lambda0,
        })
    }

    /// Constant coefficient with the tightest `lambda0 = max(0, -min eig L)`.
    pub fn constant_auto(a: CMat) -> Result<Self> {
        let (l, _) = cartesian_decompose(&a)?;
        let lambda0 = (-min_eigenvalue(&l)).max(0.0);
        Self::constant(a, lambda0)
    }

    /// One-dimensional problem `u' = -a u`.
    pub fn scalar(a: Complex64) -> Self {
        Self::constant_auto(CMat::from_element(1, 1, a)).expect("1x1 problem is always valid")
    }

    /// Time-dependent coefficient; `lambda0` is trusted as given.
    pub fn time_dependent(dim: usize, a: MatrixFn, lambda0: f64) -> Result<Self> {
        check_lambda0(lambda0)?;
        let probe = a(0.0);
        if probe.nrows() != dim || probe.ncols() != dim {
            return Err(LchsError::Shape(format!(
                "A(0) is {}x{}, expected {dim}x{dim}",
                probe.nrows(),
                probe.ncols()
            )));
        }
        Ok(OdeProblem {
            dim,
            coefficient: Coefficient::TimeDependent(a),
            lambda0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn coefficient(&self) -> &Coefficient {
        &self.coefficient
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.coefficient, Coefficient::Constant { .. })
    }

    /// `A(t)`.
    pub fn matrix_at(&self, t: f64) -> CMat {
        match &self.coefficient {
            Coefficient::Constant { a, .. } => a.clone(),
            Coefficient::TimeDependent(f) => f(t),
        }
    }

    /// `(L(t), H(t))`.
    pub fn parts_at(&self, t: f64) -> (CMat, CMat) {
        match &self.coefficient {
            Coefficient::Constant { l, h, .. } => (l.clone(), h.clone()),
            Coefficient::TimeDependent(f) => {
                cartesian_decompose(&f(t)).expect("shape checked at construction")
            }
        }
    }

    /// `sup ||L(s)||` over `[0, t]` (sampled on 65 points when time-dependent).
    pub fn l_norm(&self, t: f64) -> f64 {
        match &self.coefficient {
            Coefficient::Constant { l, .. } => spectral_norm(l),
            Coefficient::TimeDependent(_) => (0..=64)
                .map(|i| spectral_norm(&self.parts_at(t * i as f64 / 64.0).0))
                .fold(0.0, f64::max),
        }
    }

    /// The problem with `A + s I`, whose bound is `lambda0 - s` (floored at 0).
    pub fn shifted(&self, s: f64) -> OdeProblem {
        let lambda0 = (self.lambda0 - s).max(0.0);
        let dim = self.dim;
        let shift = Complex64::new(s, 0.0);
        match &self.coefficient {
            Coefficient::Constant { a, l, h } => {
                let mut a = a.clone();
                let mut l = l.clone();
                for i in 0..dim {
                    a[(i, i)] += shift;
                    l[(i, i)] += shift;
                }
                OdeProblem {
                    dim,
                    coefficient: Coefficient::Constant { a, l, h: h.clone() },
                    lambda0,
                }
            }
            Coefficient::TimeDependent(f) => {
                let f = f.clone();
                OdeProblem {
                    dim,
                    coefficient: Coefficient::TimeDependent(Arc::new(move |t| {
                        let mut m = f(t);
                        for i in 0..dim {
                            m[(i, i)] += shift;
                        }
                        m
                    })),
                    lambda0,
                }
            }
        }
    }
}

fn check_lambda0(lambda0: f64) -> Result<()> {
    if lambda0 >= 0.0 && lambda0.is_finite() {
        Ok(())
    } else {
        Err(LchsError::invalid(
            "lambda0",
            format!("{lambda0} is not a non-negative bound"),
        ))
    }
}

#[derive(Debug, Clone)]
pub struct PropagatorResult {
    pub matrix: CMat,
    /// Spectral-norm change at the last step halving (0 for constant problems).
    pub est_error: f64,
    pub steps_used: usize,
    pub warnings: Vec<String>,
}

fn check_time(t: f64, tol: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(LchsError::invalid(
            "t",
            format!("{t} is not a non-negative time"),
        ));
    }
    if tol.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(LchsError::invalid("tol", format!("{tol} is not positive")));
    }
    Ok(())
}

/// Midpoint product `prod_j step(t_{j+1/2}, h)`, later factors on the left,
/// with step doubling until successive products agree to `tol`.
fn midpoint_product<F>(
    what: &str,
    dim: usize,
    t: f64,
    tol: f64,
    step: F,
) -> Result<PropagatorResult>
where
    F: Fn(f64, f64, &mut Vec<String>) -> Result<CMat>,
{
    let mut warnings = Vec::new();
    let product = |n: usize, warnings: &mut Vec<String>| -> Result<CMat> {
        let h = t / n as f64;
        let mut u = CMat::identity(dim, dim);
        for j in 0..n {
            let mid = (j as f64 + 0.5) * h;
            u = step(mid, h, warnings)? * u;
        }
        Ok(u)
    };
    let mut n = 4;
    let mut prev = product(n, &mut warnings)?;
    loop {
        if 2 * n > MAX_STEPS {
            return Err(LchsError::Convergence {
                what: what.to_string(),
                previous: spectral_norm(&prev),
                last: spectral_norm(&prev),
            });
        }
        n *= 2;
        let next = product(n, &mut warnings)?;
        let diff = spectral_norm(&(&next - &prev));
        if diff < tol {
            warnings.dedup();
            return Ok(PropagatorResult {
                matrix: next,
                est_error: diff,
                steps_used: n,
                warnings,
            });
        }
        prev = next;
    }
}

/// `T exp(-int_0^t A(s) ds)`.
pub fn true_propagator(problem: &OdeProblem, t: f64, tol: f64) -> Result<PropagatorResult> {
    check_time(t, tol)?;
    match &problem.coefficient {
        Coefficient::Constant { a, .. } => Ok(PropagatorResult {
            matrix: expm_general(&(a * Complex64::new(-t, 0.0)))?,
            est_error: 0.0,
            steps_used: 1,
            warnings: Vec::new(),
        }),
        Coefficient::TimeDependent(f) => {
            midpoint_product("time-ordered propagator", problem.dim, t, tol, |s, h, _| {
                expm_general(&(f(s) * Complex64::new(-h, 0.0)))
            })
        }
    }
}

/// `T exp(-i int_0^t (k L(s) + H(s)) ds)`.
pub fn hamiltonian_propagator(
    problem: &OdeProblem,
    k: f64,
    t: f64,
    tol: f64,
) -> Result<PropagatorResult> {
    check_time(t, tol)?;
    let kc = Complex64::new(k, 0.0);
    match &problem.coefficient {
        Coefficient::Constant { l, h, .. } => {
            let (u, w) = expm_hermitian_unitary(&(l * kc + h), t)?;
            Ok(PropagatorResult {
                matrix: u,
                est_error: 0.0,
                steps_used: 1,
                warnings: w.into_iter().collect(),
            })
        }
        Coefficient::TimeDependent(_) => midpoint_product(
            "Hamiltonian propagator",
            problem.dim,
            t,
            tol,
            |s, h, warnings| {
                let (l, hh) = problem.parts_at(s);
                let (u, w) = expm_hermitian_unitary(&(l * kc + hh), h)?;
                warnings.extend(w);
                Ok(u)
            },
        ),
    }
}

/// Spectral data of `L` and `H` for a constant problem, so that
/// `exp(-i t (k L + H))` can be formed for many `k` without re-checking inputs.
#[derive(Debug, Clone)]
pub struct ConstantParts {
    pub l: CMat,
    pub h: CMat,
}

impl ConstantParts {
    pub fn of(problem: &OdeProblem) -> Option<Self> {
        match &problem.coefficient {
            Coefficient::Constant { l, h, .. } => Some(ConstantParts {
                l: l.clone(),
                h: h.clone(),
            }),
            Coefficient::TimeDependent(_) => None,
        }
    }

    /// `exp(-i t (k L + H))`.
    pub fn unitary(&self, k: f64, t: f64) -> CMat {
        let m = &self.l * Complex64::new(k, 0.0) + &self.h;
        let (values, vectors) = hermitian_eigen(&m);
        let mut scaled = vectors.clone();
        for (j, &l) in values.iter().enumerate() {
            let p = Complex64::new(0.0, -t * l).exp();
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= p);
        }
        scaled * vectors.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn decomposition_of_identity_and_i_identity() {
        let (l, h) = cartesian_decompose(&CMat::identity(2, 2)).unwrap();
        assert_eq!(l, CMat::identity(2, 2));
        assert_eq!(h, CMat::zeros(2, 2));
        let (l, h) = cartesian_decompose(&(CMat::identity(2, 2) * Complex64::i())).unwrap();
        assert_eq!(l, CMat::zeros(2, 2));
        assert_eq!(h, CMat::identity(2, 2));
        assert!(cartesian_decompose(&CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn scalar_propagators() {
        let p = OdeProblem::scalar(c(1.0));
        let u = true_propagator(&p, 1.0, 1e-12).unwrap();
        assert!((u.matrix[(0, 0)].re - (-1f64).exp()).abs() < 1e-15);
        let v = hamiltonian_propagator(&p, 2.5, 1.0, 1e-12).unwrap();
        assert!((v.matrix[(0, 0)] - Complex64::new(0.0, -2.5).exp()).norm() < 1e-15);
    }

    #[test]
    fn commuting_time_dependent_family() {
        let p = OdeProblem::time_dependent(2, Arc::new(|t| CMat::identity(2, 2) * c(1.0 + t)), 0.0)
            .unwrap();
        let r = true_propagator(&p, 1.0, 1e-12).unwrap();
        assert!((r.matrix[(1, 1)].re - (-1.5f64).exp()).abs() < 1e-13);
        assert!(r.est_error < 1e-12);
    }

    #[test]
    fn lambda0_is_certified_for_constant_problems() {
        let a = CMat::from_element(1, 1, c(-1.0));
        assert!(OdeProblem::constant(a.clone(), 0.5).is_err());
        assert!(OdeProblem::constant(a, 1.0).is_ok());
        assert_eq!(OdeProblem::scalar(c(-2.0)).lambda0(), 2.0);
    }

    #[test]
    fn shift_moves_the_real_part() {
        let p = OdeProblem::scalar(c(-1.0)).shifted(1.5);
        assert_eq!(p.matrix_at(0.0)[(0, 0)], c(0.5));
        assert_eq!(p.lambda0(), 0.0);
    }
}
