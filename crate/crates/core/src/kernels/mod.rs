//! Kernel families and their weight functions `g(k) = f(k) / (1 - ik)`.
//!
//! Two families are provided: the closed-form stretched exponential
//! ([`BetaParams`]) and the glue-function construction ([`GlueParams`]),
//! including its shifted variant for dynamics with `L >= -lambda0`.
//!
//! Other generating functions `F(x)` can be added as a new [`KernelFamily`]
//! variant: the engine only needs `weight`, `tail_bound` and
//! `characteristic_frequency` from a [`Kernel`].

mod beta;
mod glue;
mod table;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

pub use beta::{beta_kernel, beta_tail_bound, beta_weight};
pub use glue::{glue_psi, GlueFunction, GlueKernel};
pub use table::WeightTable;

use crate::error::{LchsError, Result};
use crate::quadrature::{par_integrate, Refinement};

/// Default relative tolerance of the internal quadratures.
pub const DEFAULT_EVAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub beta: f64,
}

impl BetaParams {
    pub fn new(beta: f64) -> Result<Self> {
        let p = BetaParams { beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta > 0.0 && self.beta < 1.0 {
            Ok(())
        } else {
            Err(LchsError::invalid(
                "beta",
                format!("{} not in the open interval (0, 1)", self.beta),
            ))
        }
    }
}

/// Glue sharpness `m`, transition length `delta` and shift `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlueParams {
    pub m: u32,
    pub delta: f64,
    pub a: f64,
}

impl GlueParams {
    pub fn new(m: u32, delta: f64, a: f64) -> Result<Self> {
        let p = GlueParams { m, delta, a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(LchsError::invalid("m", "glue order must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(LchsError::invalid(
                "delta",
                format!("{} is not a positive transition length", self.delta),
            ));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(LchsError::invalid(
                "a",
                format!("{} is not a non-negative shift", self.a),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Beta(BetaParams),
    Glue(GlueParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub eval_tol: f64,
}

impl KernelSpec {
    pub fn beta(beta: f64) -> Result<Self> {
        Ok(KernelSpec {
            family: KernelFamily::Beta(BetaParams::new(beta)?),
            eval_tol: DEFAULT_EVAL_TOL,
        })
    }

    pub fn glue(m: u32, delta: f64, a: f64) -> Result<Self> {
        Ok(KernelSpec {
            family: KernelFamily::Glue(GlueParams::new(m, delta, a)?),
            eval_tol: DEFAULT_EVAL_TOL,
        })
    }

    pub fn with_tol(mut self, eval_tol: f64) -> Result<Self> {
        self.eval_tol = eval_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.family {
            KernelFamily::Beta(p) => p.validate()?,
            KernelFamily::Glue(p) => p.validate()?,
        }
        if !(self.eval_tol > 0.0 && self.eval_tol <= 1e-6) {
            return Err(LchsError::invalid(
                "eval_tol",
                format!("{} not in (0, 1e-6]", self.eval_tol),
            ));
        }
        Ok(())
    }

    /// Shift `a` of the generating function (0 for the beta family).
    pub fn shift(&self) -> f64 {
        match &self.family {
            KernelFamily::Beta(_) => 0.0,
            KernelFamily::Glue(p) => p.a,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match &self.family {
            KernelFamily::Beta(_) => "beta",
            KernelFamily::Glue(_) => "glue",
        }
    }

    /// Parameters as CSV fields `beta,m,delta,a` (empty where not applicable).
    pub fn param_fields(&self) -> String {
        match &self.family {
            KernelFamily::Beta(p) => format!("{},,,", p.beta),
            KernelFamily::Glue(p) => format!(",{},{},{}", p.m, p.delta, p.a),
        }
    }

    /// Prepares an evaluator (computes the glue normalization once).
    pub fn kernel(&self) -> Result<Kernel> {
        self.validate()?;
        Ok(match self.family {
            KernelFamily::Beta(p) => Kernel::Beta(p),
            KernelFamily::Glue(p) => Kernel::Glue(GlueKernel::new(p, self.eval_tol)?),
        })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::Beta(p) => write!(f, "beta(beta={})", p.beta),
            KernelFamily::Glue(p) => write!(f, "glue(m={},delta={},a={})", p.m, p.delta, p.a),
        }
    }
}

/// A ready-to-evaluate kernel.
#[derive(Debug, Clone, Copy)]
pub enum Kernel {
    Beta(BetaParams),
    Glue(GlueKernel),
}

impl Kernel {
    /// `g(k)`.
    pub fn weight(&self, k: f64) -> Result<Complex64> {
        match self {
            Kernel::Beta(p) => Ok(beta_weight(k, p)),
            Kernel::Glue(g) => g.weight(k),
        }
    }

    /// Upper bound on `integral_{|k| > cutoff} |g|`.
    pub fn tail_bound(&self, cutoff: f64) -> Result<f64> {
        match self {
            Kernel::Beta(p) => Ok(beta_tail_bound(cutoff, p)),
            Kernel::Glue(g) => g.tail_bound(cutoff),
        }
    }

    /// Rate (in rad per unit k) at which `g` itself oscillates.
    pub fn characteristic_frequency(&self) -> f64 {
        match self {
            Kernel::Beta(_) => 1.0,
            Kernel::Glue(g) => g.characteristic_frequency(),
        }
    }
}

/// Width of the base quadrature panels in `k` for an integrand oscillating at
/// `frequency` rad per unit `k`.
pub fn panel_width(frequency: f64) -> f64 {
    (2.0 * PI / frequency.max(1.0)).min(1.0)
}

/// `g(k)` for a glue spec.
pub fn glue_weight(k: f64, spec: &KernelSpec) -> Result<Complex64> {
    match spec.kernel()? {
        Kernel::Glue(g) => g.weight(k),
        Kernel::Beta(_) => Err(LchsError::invalid(
            "spec",
            "glue_weight needs a glue family",
        )),
    }
}

/// Evaluates `g` on strictly increasing `nodes`.
pub fn tabulate_weights(spec: &KernelSpec, nodes: &[f64]) -> Result<WeightTable> {
    use rayon::prelude::*;
    if nodes
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(LchsError::invalid("nodes", "must be strictly increasing"));
    }
    let kernel = spec.kernel()?;
    let values = nodes
        .par_iter()
        .map(|&k| {
            kernel.weight(k).map_err(|e| match e {
                LchsError::AtNode { .. } => e,
                other => LchsError::AtNode {
                    node: k,
                    source: Box::new(other),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    WeightTable::new(*spec, nodes.to_vec(), values)
}

fn l1_on(kernel: &Kernel, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    let width = panel_width(kernel.characteristic_frequency());
    let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
    let r = par_integrate(
        "weight L1 norm",
        |k| Ok(kernel.weight(k)?.norm()),
        lo,
        hi,
        Refinement::relative(rel_tol)
            .with_start(panels)
            .with_max_panels(panels << 10),
    )?;
    Ok(r.value)
}

/// `integral_{-K}^{K} |g(k)| dk`.
pub fn weight_l1_norm(spec: &KernelSpec, cutoff: f64) -> Result<f64> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(LchsError::invalid("K", format!("{cutoff} is not positive")));
    }
    let kernel = spec.kernel()?;
    // |g(-k)| = |g(k)|.
    Ok(2.0 * l1_on(&kernel, 0.0, cutoff, spec.eval_tol)?)
}

/// Smallest window `W >= start` in a doubling sequence with `tail_bound(W) < target`.
fn window_for(kernel: &Kernel, start: f64, target: f64) -> Result<(f64, f64)> {
    let mut w = start.max(8.0);
    loop {
        let b = kernel.tail_bound(w)?;
        if b < target {
            return Ok((w, b));
        }
        if w > 1e6 {
            return Err(LchsError::Convergence {
                what: "tail window search".into(),
                previous: w,
                last: b,
            });
        }
        w *= 2.0;
    }
}

/// `integral_{|k| > K} |g(k)| dk`: numeric out to a window where the analytic
/// tail bound is below `1e-14`, plus that bound.
pub fn weight_tail_l1(spec: &KernelSpec, cutoff: f64) -> Result<f64> {
    let kernel = spec.kernel()?;
    let (window, bound) = window_for(&kernel, 2.0 * cutoff, 1e-14)?;
    let inner = l1_on(&kernel, cutoff, window, 1e-10)?;
    Ok(2.0 * inner + bound)
}

/// Result of integrating `g` over the real line.
#[derive(Debug, Clone, Copy)]
pub struct Normalization {
    /// `integral_{-W}^{W} g(k) dk` (real part; the imaginary part cancels).
    pub value: f64,
    pub imaginary: f64,
    pub window: f64,
    /// Analytic bound on the neglected `|k| > W` contribution.
    pub tail_bound: f64,
}

/// `integral_R g(k) dk`, which must equal `F(0) = 1`.
pub fn normalization(spec: &KernelSpec) -> Result<Normalization> {
    let kernel = spec.kernel()?;
    let (window, tail_bound) = window_for(&kernel, 16.0, 1e-11)?;
    let width = panel_width(kernel.characteristic_frequency());
    let panels = (window / width).ceil() as usize;
    let r = par_integrate(
        "normalization",
        |k| kernel.weight(k),
        -window,
        window,
        Refinement::relative(1e-13)
            .with_abs(1e-13)
            .with_start(2 * panels)
            .with_max_panels(panels << 6),
    )?;
    Ok(Normalization {
        value: r.value.re,
        imaginary: r.value.im,
        window,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(KernelSpec::beta(0.0).is_err());
        assert!(KernelSpec::beta(1.0).is_err());
        assert!(KernelSpec::beta(0.5).is_ok());
        assert!(KernelSpec::glue(0, 2.0, 0.0).is_err());
        assert!(KernelSpec::glue(2, 0.0, 0.0).is_err());
        assert!(KernelSpec::glue(2, 2.0, -1.0).is_err());
        assert!(KernelSpec::glue(2, 2.0, 0.0)
            .unwrap()
            .with_tol(1e-3)
            .is_err());
        assert!(KernelSpec::glue(2, 2.0, 0.0)
            .unwrap()
            .with_tol(1e-8)
            .is_ok());
    }

    #[test]
    fn glue_weight_rejects_beta_spec() {
        let spec = KernelSpec::beta(0.7).unwrap();
        assert!(glue_weight(1.0, &spec).is_err());
    }

    #[test]
    fn tabulate_rejects_unsorted_nodes() {
        let spec = KernelSpec::beta(0.7).unwrap();
        assert!(tabulate_weights(&spec, &[0.0, 0.0]).is_err());
        assert!(tabulate_weights(&spec, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn small_window_l1_is_midpoint_limit() {
        for spec in [
            KernelSpec::beta(0.8).unwrap(),
            KernelSpec::glue(2, 4.0, 0.0).unwrap(),
        ] {
            let k = 1e-8;
            let g0 = spec.kernel().unwrap().weight(0.0).unwrap().norm();
            let l1 = weight_l1_norm(&spec, k).unwrap();
            assert!((l1 - 2.0 * k * g0).abs() <= 1e-12 * l1);
        }
    }

    #[test]
    fn panel_width_rule() {
        assert_eq!(panel_width(0.5), 1.0);
        assert_eq!(panel_width(6.0), 1.0);
        assert!((panel_width(20.0) - 2.0 * PI / 20.0).abs() < 1e-15);
    }
}
