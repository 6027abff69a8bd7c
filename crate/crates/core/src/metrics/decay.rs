//! Least-squares fit of `log|g(k)| ~ -c k^p + r log k + b`.

use nalgebra::{DMatrix, DVector};

use crate::error::{LchsError, Result};
use crate::kernels::KernelSpec;

/// Magnitudes below this are treated as underflowed.
const UNDERFLOW: f64 = 1e-240;

const SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Stretching exponent `p`.
    pub exponent: f64,
    /// Rate `c`.
    pub rate: f64,
    /// Power-law correction `r`.
    pub log_coefficient: f64,
    pub offset: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub k_max: f64,
    pub samples: usize,
}

fn samples(spec: &KernelSpec, k_max: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(k_max >= 100.0 && k_max.is_finite()) {
        return Err(LchsError::invalid("k_max", format!("{k_max} is below 100")));
    }
    let kernel = spec.kernel()?;
    let lo = k_max / 10.0;
    let mut ks = Vec::with_capacity(SAMPLES);
    let mut logs = Vec::with_capacity(SAMPLES);
    for i in 0..SAMPLES {
        let k = lo * (k_max / lo).powf(i as f64 / (SAMPLES - 1) as f64);
        let g = kernel.weight(k)?.norm();
        if g > UNDERFLOW {
            ks.push(k);
            logs.push(g.ln());
        }
    }
    if 2 * ks.len() < SAMPLES {
        return Err(LchsError::FitDegenerate(format!(
            "|g| underflows on {} of {SAMPLES} samples in [{lo}, {k_max}]",
            SAMPLES - ks.len()
        )));
    }
    Ok((ks, logs))
}

/// Linear least squares for `(c, r, b)` at fixed `p`; returns the fit and the
/// RMS residual.
fn fit_at(ks: &[f64], logs: &[f64], p: f64) -> Option<([f64; 3], f64)> {
    let n = ks.len();
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => -ks[i].powf(p),
        1 => ks[i].ln(),
        _ => 1.0,
    });
    let y = DVector::from_column_slice(logs);
    let sol = x.clone().svd(true, true).solve(&y, 1e-14).ok()?;
    let res = (&x * &sol - &y).norm() / (n as f64).sqrt();
    Some(([sol[0], sol[1], sol[2]], res))
}

fn build(ks: &[f64], logs: &[f64], p: f64, k_max: f64) -> Result<DecayFit> {
    let ([c, r, b], residual) = fit_at(ks, logs, p)
        .ok_or_else(|| LchsError::FitDegenerate("singular design matrix".into()))?;
    Ok(DecayFit {
        exponent: p,
        rate: c,
        log_coefficient: r,
        offset: b,
        residual,
        k_max,
        samples: ks.len(),
    })
}

/// Fit with free `p` over `[k_max/10, k_max]`.
pub fn decay_diagnostic(spec: &KernelSpec, k_max: f64) -> Result<DecayFit> {
    let (ks, logs) = samples(spec, k_max)?;
    let cost = |p: f64| fit_at(&ks, &logs, p).map_or(f64::INFINITY, |f| f.1);
    // Coarse scan, then golden-section refinement around the best point.
    let grid: Vec<f64> = (1..=200).map(|i| i as f64 * 0.01).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .unwrap();
    let (mut lo, mut hi) = ((best - 0.01).max(1e-3), best + 0.01);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if cost(m1) < cost(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    build(&ks, &logs, 0.5 * (lo + hi), k_max)
}

/// Fit with the exponent held at `p` (e.g. `p = 1` for a pure exponential rate).
pub fn decay_diagnostic_fixed(spec: &KernelSpec, k_max: f64, p: f64) -> Result<DecayFit> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(LchsError::invalid("p", format!("{p} is not positive")));
    }
    let (ks, logs) = samples(spec, k_max)?;
    build(&ks, &logs, p, k_max)
}
