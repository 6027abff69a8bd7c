//! Seeded random coefficient matrices `A = L + iH`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{LchsError, Result};
use crate::linalg::{spectral_norm, CMat};
use crate::propagators::OdeProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleKind {
    /// `L >= 0`.
    Stable,
    /// `L >= -lambda0`.
    Shifted(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub norm_bound: f64,
    pub kind: EnsembleKind,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            dim: 4,
            count: 20,
            seed: 1,
            norm_bound: 1.0,
            kind: EnsembleKind::Stable,
        }
    }
}

impl EnsembleSpec {
    pub fn stable(dim: usize, count: usize, seed: u64) -> Self {
        EnsembleSpec {
            dim,
            count,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(LchsError::invalid("dim", "must be >= 1"));
        }
        if self.count == 0 {
            return Err(LchsError::invalid("count", "must be >= 1"));
        }
        if !(self.norm_bound > 0.0 && self.norm_bound.is_finite()) {
            return Err(LchsError::invalid("norm_bound", "must be positive"));
        }
        if let EnsembleKind::Shifted(l0) = self.kind {
            if !(l0 > 0.0 && l0.is_finite()) {
                return Err(LchsError::invalid(
                    "lambda0",
                    "shifted ensembles need lambda0 > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn lambda0(&self) -> f64 {
        match self.kind {
            EnsembleKind::Stable => 0.0,
            EnsembleKind::Shifted(l0) => l0,
        }
    }

    /// All `count` problems, in index order.
    pub fn problems(&self) -> Result<Vec<OdeProblem>> {
        (0..self.count).map(|i| random_problem(self, i)).collect()
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Problem `index` of the ensemble, drawn from ChaCha8 stream `index` of `seed`.
///
/// `L = Q diag(lambda) Q^dagger` with `Q` from the QR factorization of a
/// complex Gaussian matrix and `lambda` uniform on `[0, b]` (or `[-lambda0, b]`);
/// `H = (G + G^dagger)/2` scaled to `||H|| = b`. If `||L + iH|| > b`, both
/// parts are scaled down together so that `||A|| <= b`.
pub fn random_problem(spec: &EnsembleSpec, index: usize) -> Result<OdeProblem> {
    spec.validate()?;
    if index >= spec.count {
        return Err(LchsError::invalid(
            "index",
            format!("{index} outside ensemble of {}", spec.count),
        ));
    }
    let n = spec.dim;
    let b = spec.norm_bound;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let q = gaussian_matrix(&mut rng, n).qr().q();
    let lo = -spec.lambda0();
    let lambda = DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(lo..=b), 0.0));
    let l = &q * CMat::from_diagonal(&lambda) * q.adjoint();
    let l = (&l + l.adjoint()) * Complex64::new(0.5, 0.0);

    let g = gaussian_matrix(&mut rng, n);
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let h = &h * Complex64::new(b / spectral_norm(&h), 0.0);

    let a = l + h * Complex64::i();
    let norm = spectral_norm(&a);
    let a = if norm > b {
        a * Complex64::new(b / norm, 0.0)
    } else {
        a
    };
    OdeProblem::constant(a, spec.lambda0())
}
