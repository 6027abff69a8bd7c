//! Minimum truncation `K` over an ensemble, and the cost metric `K ||g||_1`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LchsError, Result};
use crate::kernels::{panel_width, weight_l1_norm, Kernel, KernelSpec};
use crate::linalg::{spectral_norm, CMat};
use crate::propagators::{true_propagator, ConstantParts, OdeProblem};
use crate::quadrature::gl32;

use super::ensemble::EnsembleSpec;

/// Default largest `K` searched.
pub const DEFAULT_K_CAP: f64 = 5000.0;

/// Relative resolution of the bisection stage.
pub const GRID_RESOLUTION: f64 = 0.02;

/// Smallest target error accepted; below it quadrature rounding dominates.
pub const MIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinKResult {
    pub spec: KernelSpec,
    pub epsilon: f64,
    pub k_min: f64,
    /// `(K, max ensemble error)` for every evaluated `K`, sorted by `K`, with
    /// the error replaced by its running minimum.
    pub errors_at_k: Vec<(f64, f64)>,
    /// Gap between `k_min` and the largest evaluated `K` that fails.
    pub grid_resolution: f64,
    /// Change of the error at `k_min` when the quadrature panels are halved.
    pub quadrature_check: f64,
}

impl MinKResult {
    /// Error (running minimum) recorded at `k_min`.
    pub fn error_at_min(&self) -> f64 {
        self.errors_at_k
            .iter()
            .find(|(k, _)| *k == self.k_min)
            .map_or(f64::NAN, |p| p.1)
    }
}

/// `max_p ||T_p - sum_{|k_j| <= K} c_j U_j||` as a function of `K`, with
/// panel sums accumulated once and reused for every `K`.
///
/// Panels of fixed width tile `[0, K)`; the partial panel up to `K` gets its
/// own Gauss-Legendre rule, so every `K` is integrated at full order.
pub struct TruncationCurve {
    kernel: Kernel,
    t: f64,
    width: f64,
    members: Vec<Member>,
}

struct Member {
    parts: ConstantParts,
    truth: CMat,
    /// `cumulative[j]` = sum over panels `0..j` (both signs of `k`).
    cumulative: Vec<CMat>,
}

impl TruncationCurve {
    /// `panel_scale` shrinks the base panel width (1 for the standard rule).
    pub fn new(
        spec: &KernelSpec,
        problems: &[OdeProblem],
        t: f64,
        panel_scale: f64,
    ) -> Result<Self> {
        if problems.is_empty() {
            return Err(LchsError::invalid("problems", "ensemble is empty"));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(LchsError::invalid(
                "t",
                format!("{t} is not a non-negative time"),
            ));
        }
        let kernel = spec.kernel()?;
        let mut max_l = 0f64;
        let mut members = Vec::with_capacity(problems.len());
        for p in problems {
            let parts = ConstantParts::of(p).ok_or_else(|| {
                LchsError::Precondition("minimum-K search needs constant problems".into())
            })?;
            if p.lambda0() * t > spec.shift() * (1.0 + 1e-12) {
                return Err(LchsError::Precondition(format!(
                    "lambda0 * t = {} exceeds the kernel shift {}",
                    p.lambda0() * t,
                    spec.shift()
                )));
            }
            max_l = max_l.max(spectral_norm(&parts.l));
            let truth = true_propagator(p, t, 1e-14)?.matrix;
            let n = p.dim();
            members.push(Member {
                parts,
                truth,
                cumulative: vec![CMat::zeros(n, n)],
            });
        }
        let width = panel_width(kernel.characteristic_frequency() + t * max_l) / panel_scale;
        Ok(TruncationCurve {
            kernel,
            t,
            width,
            members,
        })
    }

    pub fn panel_width(&self) -> f64 {
        self.width
    }

    /// `sum c(k) U(k) + conj(c(k)) U(-k)` over the Gauss-Legendre nodes of
    /// `[lo, hi]`, for every member.
    fn segment(&self, lo: f64, hi: f64) -> Result<Vec<CMat>> {
        let gl = gl32();
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let nodes: Vec<(f64, Complex64)> = gl
            .nodes()
            .par_iter()
            .zip(gl.weights())
            .map(|(x, w)| {
                let k = mid + half * x;
                self.kernel.weight(k).map(|g| (k, g * (w * half)))
            })
            .collect::<Result<_>>()?;
        let t = self.t;
        Ok(self
            .members
            .par_iter()
            .map(|m| {
                let n = m.truth.nrows();
                nodes.iter().fold(CMat::zeros(n, n), |acc, &(k, c)| {
                    acc + m.parts.unitary(k, t) * c + m.parts.unitary(-k, t) * c.conj()
                })
            })
            .collect())
    }

    fn ensure_panels(&mut self, count: usize) -> Result<()> {
        while self.members[0].cumulative.len() <= count {
            let j = self.members[0].cumulative.len() - 1;
            let lo = j as f64 * self.width;
            let sums = self.segment(lo, lo + self.width)?;
            for (m, s) in self.members.iter_mut().zip(sums) {
                let next = m.cumulative.last().unwrap() + s;
                m.cumulative.push(next);
            }
        }
        Ok(())
    }

    /// Maximum over the ensemble of the spectral-norm truncation error at `K`.
    pub fn error(&mut self, cutoff: f64) -> Result<f64> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(LchsError::invalid("K", format!("{cutoff} is not positive")));
        }
        let full = (cutoff / self.width).floor() as usize;
        self.ensure_panels(full)?;
        let start = full as f64 * self.width;
        let partial = if cutoff > start {
            Some(self.segment(start, cutoff)?)
        } else {
            None
        };
        Ok(self
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mut recon = m.cumulative[full].clone();
                if let Some(p) = &partial {
                    recon += &p[i];
                }
                spectral_norm(&(&m.truth - recon))
            })
            .fold(0.0, f64::max))
    }
}

/// Search options for [`min_truncation_k_for`].
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub k_start: f64,
    pub k_cap: f64,
    pub resolution: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            k_start: 1.0,
            k_cap: DEFAULT_K_CAP,
            resolution: GRID_RESOLUTION,
        }
    }
}

/// Smallest `K` with `max_p error_p(K) <= epsilon` over `problems`:
/// geometric doubling from `k_start`, then bisection to `resolution`.
pub fn min_truncation_k_for(
    spec: &KernelSpec,
    epsilon: f64,
    problems: &[OdeProblem],
    t: f64,
    options: SearchOptions,
) -> Result<MinKResult> {
    let mut r = min_truncation_k_multi(spec, &[epsilon], problems, t, options)?;
    Ok(r.remove(0))
}

/// [`min_truncation_k_for`] for several targets, sharing the panel sums.
pub fn min_truncation_k_multi(
    spec: &KernelSpec,
    epsilons: &[f64],
    problems: &[OdeProblem],
    t: f64,
    options: SearchOptions,
) -> Result<Vec<MinKResult>> {
    for &epsilon in epsilons {
        if !(epsilon >= MIN_EPSILON && epsilon.is_finite()) {
            return Err(LchsError::invalid(
                "epsilon",
                format!("{epsilon} is below the quadrature floor {MIN_EPSILON}"),
            ));
        }
    }
    if !(options.k_start > 0.0 && options.k_cap >= options.k_start) {
        return Err(LchsError::invalid("K cap", "need 0 < k_start <= k_cap"));
    }
    let mut curve = TruncationCurve::new(spec, problems, t, 1.0)?;
    let mut fine: Option<TruncationCurve> = None;
    epsilons
        .iter()
        .map(|&epsilon| {
            let mut r = search(&mut curve, spec, epsilon, options)?;
            let fine = match &mut fine {
                Some(f) => f,
                None => fine.insert(TruncationCurve::new(spec, problems, t, 2.0)?),
            };
            r.quadrature_check = (fine.error(r.k_min)? - r.error_at_min()).abs();
            Ok(r)
        })
        .collect()
}

fn search(
    curve: &mut TruncationCurve,
    spec: &KernelSpec,
    epsilon: f64,
    options: SearchOptions,
) -> Result<MinKResult> {
    let mut raw: Vec<(f64, f64)> = Vec::new();

    // Geometric stage.
    let mut k = options.k_start;
    let mut lo = None;
    let mut hi = loop {
        let e = curve.error(k)?;
        raw.push((k, e));
        if e <= epsilon {
            break k;
        }
        lo = Some(k);
        if k >= options.k_cap {
            return Err(LchsError::Unreachable {
                epsilon,
                cap: options.k_cap,
            });
        }
        k = (2.0 * k).min(options.k_cap);
    };

    // Bisection stage. Every evaluated point below `lo` fails, so the running
    // minimum at `mid` is feasible exactly when `error(mid)` is.
    if let Some(mut lo) = lo {
        while hi - lo > options.resolution * hi {
            let mid = 0.5 * (lo + hi);
            let e = curve.error(mid)?;
            raw.push((mid, e));
            if e <= epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut running = f64::INFINITY;
    let errors_at_k: Vec<(f64, f64)> = raw
        .iter()
        .map(|&(k, e)| {
            running = running.min(e);
            (k, running)
        })
        .collect();
    let grid_resolution = errors_at_k
        .iter()
        .rev()
        .find(|(k, _)| *k < hi)
        .map_or(0.0, |p| hi - p.0);
    Ok(MinKResult {
        spec: *spec,
        epsilon,
        k_min: hi,
        errors_at_k,
        grid_resolution,
        quadrature_check: 0.0,
    })
}

/// [`min_truncation_k_for`] on the problems of `ensemble`, default options.
pub fn min_truncation_k(
    spec: &KernelSpec,
    epsilon: f64,
    ensemble: &EnsembleSpec,
    t: f64,
) -> Result<MinKResult> {
    let problems = ensemble.problems()?;
    min_truncation_k_for(spec, epsilon, &problems, t, SearchOptions::default())
}

/// `K * integral_{-K}^{K} |g|`.
pub fn cost_metric(spec: &KernelSpec, cutoff: f64) -> Result<f64> {
    Ok(cutoff * weight_l1_norm(spec, cutoff)?)
}
