//! Discretized LCHS sum `sum_j c_j T exp(-i int (k_j L + H))`, its error
//! against the true propagator, observables, and the shifted (unstable) case.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LchsError, Result};
use crate::io::fmt_f64;
use crate::kernels::{
    panel_width, weight_l1_norm, weight_tail_l1, Kernel, KernelFamily, KernelSpec,
};
use crate::linalg::{hermitian_residual, pairwise_sum, spectral_norm, CMat, CVec, HERMITIAN_TOL};
use crate::propagators::{hamiltonian_propagator, true_propagator, ConstantParts, OdeProblem};
use crate::quadrature::gl32;

/// Refinement levels tried before reporting non-convergence.
pub const MAX_LEVELS: u32 = 6;

/// Nodes `k_j` in `[-K, K]` with coefficients `c_j = w_j g(k_j)`.
///
/// The node set is the mirror image of a composite Gauss-Legendre rule on
/// `[0, K]`, so it is exactly symmetric and `c(-k) = conj(c(k))`.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    pub spec: KernelSpec,
    pub cutoff: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    pub refinement_level: u32,
    /// Panels on the half line `[0, K]`.
    pub panels: usize,
}

impl QuadratureScheme {
    fn build(
        spec: &KernelSpec,
        kernel: &Kernel,
        cutoff: f64,
        panels: usize,
        level: u32,
    ) -> Result<Self> {
        let (half_nodes, half_weights) = gl32().composite_nodes(0.0, cutoff, panels);
        let half_values = half_nodes
            .par_iter()
            .map(|&k| kernel.weight(k))
            .collect::<Result<Vec<_>>>()?;
        let n = half_nodes.len();
        let mut nodes = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        let mut coefficients = Vec::with_capacity(2 * n);
        for j in (0..n).rev() {
            nodes.push(-half_nodes[j]);
            weights.push(half_weights[j]);
            coefficients.push(half_values[j].conj() * half_weights[j]);
        }
        for j in 0..n {
            nodes.push(half_nodes[j]);
            weights.push(half_weights[j]);
            coefficients.push(half_values[j] * half_weights[j]);
        }
        Ok(QuadratureScheme {
            spec: *spec,
            cutoff,
            nodes,
            weights,
            coefficients,
            refinement_level: level,
            panels,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_j c_j`, which approximates `integral_{-K}^{K} g`.
    pub fn coefficient_sum(&self) -> Complex64 {
        self.coefficients.iter().sum()
    }

    /// `sum_j |c_j|`, the LCU 1-norm.
    pub fn abs_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).sum()
    }
}

/// Successively doubled quadrature schemes over `[-K, K]`, built on demand.
#[derive(Debug, Clone)]
pub struct QuadratureLadder {
    spec: KernelSpec,
    kernel: Kernel,
    cutoff: f64,
    base_panels: usize,
    levels: Vec<QuadratureScheme>,
}

impl QuadratureLadder {
    /// Base panel width `min(1, 2 pi / max(1, oscillation))`.
    pub fn new(spec: &KernelSpec, cutoff: f64, oscillation: f64) -> Result<Self> {
        check_cutoff(cutoff)?;
        let kernel = spec.kernel()?;
        let base_panels = (cutoff / panel_width(oscillation)).ceil().max(1.0) as usize;
        Ok(QuadratureLadder {
            spec: *spec,
            kernel,
            cutoff,
            base_panels,
            levels: Vec::new(),
        })
    }

    /// Ladder whose base resolution covers the oscillation of both `g` and the
    /// propagators of `problem` up to time `t`.
    pub fn for_problem(
        spec: &KernelSpec,
        cutoff: f64,
        problem: &OdeProblem,
        t: f64,
    ) -> Result<Self> {
        let kernel = spec.kernel()?;
        Self::new(spec, cutoff, oscillation(&kernel, problem, t))
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Scheme at refinement `level` (panels `base * 2^level`).
    pub fn level(&mut self, level: u32) -> Result<&QuadratureScheme> {
        while self.levels.len() <= level as usize {
            let l = self.levels.len() as u32;
            let s = QuadratureScheme::build(
                &self.spec,
                &self.kernel,
                self.cutoff,
                self.base_panels << l,
                l,
            )?;
            self.levels.push(s);
        }
        Ok(&self.levels[level as usize])
    }
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff > 0.0 && cutoff.is_finite() {
        Ok(())
    } else {
        Err(LchsError::invalid(
            "K",
            format!("{cutoff} is not a positive cutoff"),
        ))
    }
}

/// Characteristic oscillation `a + delta + t ||L||` (or `1 + t ||L||` for the
/// beta family) of the LCHS integrand in `k`.
pub fn oscillation(kernel: &Kernel, problem: &OdeProblem, t: f64) -> f64 {
    kernel.characteristic_frequency() + t * problem.l_norm(t)
}

/// Scheme whose `sum c_j` and `sum |c_j|` are both stable to `tol` under one
/// more doubling.
pub fn build_quadrature(spec: &KernelSpec, cutoff: f64, tol: f64) -> Result<QuadratureScheme> {
    check_tol(tol)?;
    let kernel = spec.kernel()?;
    let mut ladder = QuadratureLadder::new(spec, cutoff, kernel.characteristic_frequency())?;
    let mut prev = {
        let s = ladder.level(0)?;
        (s.coefficient_sum(), s.abs_sum())
    };
    for level in 1..=MAX_LEVELS {
        let s = ladder.level(level)?;
        let next = (s.coefficient_sum(), s.abs_sum());
        if (next.0 - prev.0).norm() < tol && (next.1 - prev.1).abs() < tol {
            return Ok(ladder.levels.swap_remove(level as usize));
        }
        prev = next;
    }
    Err(LchsError::Convergence {
        what: "quadrature scheme".into(),
        previous: prev.0.norm(),
        last: prev.1,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(LchsError::invalid("tol", format!("{tol} is not positive")))
    }
}

fn regime_warning(problem: &OdeProblem, spec: &KernelSpec, t: f64) -> Option<String> {
    let a = spec.shift();
    (problem.lambda0() * t > a * (1.0 + 1e-12)).then(|| {
        format!(
            "lambda0 * t = {} exceeds the kernel shift a = {a}; the identity does not apply",
            problem.lambda0() * t
        )
    })
}

/// The unitaries `U_j` for all nodes, in node order.
fn unitaries(problem: &OdeProblem, nodes: &[f64], t: f64, tol: f64) -> Result<Vec<CMat>> {
    match ConstantParts::of(problem) {
        Some(parts) => Ok(nodes.par_iter().map(|&k| parts.unitary(k, t)).collect()),
        None => nodes
            .par_iter()
            .map(|&k| hamiltonian_propagator(problem, k, t, tol).map(|r| r.matrix))
            .collect(),
    }
}

fn weighted_sum(
    problem: &OdeProblem,
    nodes: &[f64],
    coefficients: &[Complex64],
    t: f64,
    tol: f64,
) -> Result<CMat> {
    let n = problem.dim();
    let terms: Vec<CMat> = unitaries(problem, nodes, t, tol)?
        .into_iter()
        .zip(coefficients)
        .map(|(u, c)| u * *c)
        .collect();
    Ok(pairwise_sum(terms, n, n))
}

/// `sum_j c_j T exp(-i int_0^t (k_j L + H))`.
pub fn reconstruct_propagator(
    problem: &OdeProblem,
    scheme: &QuadratureScheme,
    t: f64,
    tol: f64,
) -> Result<CMat> {
    check_tol(tol)?;
    if let Some(w) = regime_warning(problem, &scheme.spec, t) {
        warn!("{w}");
    }
    weighted_sum(problem, &scheme.nodes, &scheme.coefficients, t, tol)
}

/// A reconstruction whose quadrature has converged on the operator.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub matrix: CMat,
    pub level: u32,
    pub nodes: usize,
    /// Spectral-norm change from the previous level.
    pub change: f64,
    pub coefficient_sum: Complex64,
    pub abs_sum: f64,
}

/// Doubles the ladder until the reconstructed operator changes by `< tol`.
pub fn reconstruct_converged(
    problem: &OdeProblem,
    ladder: &mut QuadratureLadder,
    t: f64,
    tol: f64,
) -> Result<Reconstruction> {
    check_tol(tol)?;
    let mut prev = reconstruct_propagator(problem, ladder.level(0)?, t, tol)?;
    let mut last_change = f64::INFINITY;
    for level in 1..=MAX_LEVELS {
        let scheme = ladder.level(level)?;
        let next = weighted_sum(problem, &scheme.nodes, &scheme.coefficients, t, tol)?;
        let change = spectral_norm(&(&next - &prev));
        if change < tol {
            return Ok(Reconstruction {
                matrix: next,
                level,
                nodes: scheme.len(),
                change,
                coefficient_sum: scheme.coefficient_sum(),
                abs_sum: scheme.abs_sum(),
            });
        }
        last_change = change;
        prev = next;
    }
    Err(LchsError::Convergence {
        what: "reconstructed propagator".into(),
        previous: last_change,
        last: spectral_norm(&prev),
    })
}

/// `||T exp(-int A) - reconstruction||` in the spectral norm, with both sides
/// converged to `0.1 tol`.
pub fn truncation_error(
    problem: &OdeProblem,
    spec: &KernelSpec,
    cutoff: f64,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let mut ladder = QuadratureLadder::for_problem(spec, cutoff, problem, t)?;
    truncation_error_with(problem, &mut ladder, t, tol)
}

/// [`truncation_error`] reusing a prepared ladder (e.g. across an ensemble).
pub fn truncation_error_with(
    problem: &OdeProblem,
    ladder: &mut QuadratureLadder,
    t: f64,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    let truth = true_propagator(problem, t, 0.1 * tol)?;
    let recon = reconstruct_converged(problem, ladder, t, 0.1 * tol)?;
    Ok(spectral_norm(&(truth.matrix - recon.matrix)))
}

fn check_observable(u0: &CVec, observable: &CMat, dim: usize) -> Result<()> {
    if u0.len() != dim || observable.nrows() != dim || observable.ncols() != dim {
        return Err(LchsError::Shape(format!(
            "u0 has length {}, O is {}x{}, problem dimension {dim}",
            u0.len(),
            observable.nrows(),
            observable.ncols()
        )));
    }
    if u0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LchsError::invalid("u0", "entries must be finite"));
    }
    let residual = hermitian_residual(observable);
    if residual > HERMITIAN_TOL {
        return Err(LchsError::NotHermitian { residual });
    }
    Ok(())
}

fn real_part_checked(z: Complex64) -> Result<f64> {
    if z.im.abs() > 1e-10 * z.norm().max(1.0) {
        return Err(LchsError::Precondition(format!(
            "observable has imaginary residue {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `u(t)^dagger O u(t)` with `u(t) = sum_j c_j U_j u0`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_observable(
    problem: &OdeProblem,
    spec: &KernelSpec,
    cutoff: f64,
    t: f64,
    u0: &CVec,
    observable: &CMat,
    tol: f64,
) -> Result<f64> {
    check_observable(u0, observable, problem.dim())?;
    let mut ladder = QuadratureLadder::for_problem(spec, cutoff, problem, t)?;
    let recon = reconstruct_converged(problem, &mut ladder, t, tol)?;
    let v = &recon.matrix * u0;
    real_part_checked(v.dotc(&(observable * &v)))
}

/// `sum_j sum_j' conj(c_j) c_j' <u0| U_j^dagger O U_j' |u0>` on a fixed scheme.
pub fn observable_double_sum(
    problem: &OdeProblem,
    scheme: &QuadratureScheme,
    t: f64,
    u0: &CVec,
    observable: &CMat,
    tol: f64,
) -> Result<f64> {
    check_observable(u0, observable, problem.dim())?;
    let states: Vec<CVec> = unitaries(problem, &scheme.nodes, t, tol)?
        .into_iter()
        .map(|u| u * u0)
        .collect();
    let o_states: Vec<CVec> = states.iter().map(|s| observable * s).collect();
    let rows: Vec<Complex64> = (0..states.len())
        .into_par_iter()
        .map(|j| {
            let cj = scheme.coefficients[j].conj();
            let inner: Complex64 = o_states
                .iter()
                .zip(&scheme.coefficients)
                .map(|(os, c)| states[j].dotc(os) * *c)
                .sum();
            cj * inner
        })
        .collect();
    real_part_checked(rows.iter().sum())
}

/// How a breach of `lambda0 t <= a` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeMode {
    Strict,
    Diagnostic,
}

/// One validation experiment.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub spec: KernelSpec,
    pub cutoff: f64,
    pub t: f64,
    /// Spectral norm of the operator difference.
    pub recon_error: f64,
    pub relative_error: f64,
    /// `||(truth - recon) u0||` for the probe vector `e_0`.
    pub vector_error: f64,
    pub tail_bound: f64,
    pub l1_norm: f64,
    pub cost_metric: f64,
    pub quadrature_level: u32,
    pub nodes: usize,
    pub shift_identity_residual: Option<f64>,
    pub regime_breach: bool,
    pub seeds: Vec<u64>,
    pub timings: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Column names of [`ValidationReport::csv_row`].
pub const REPORT_CSV_HEADER: &str =
    "family,beta,m,delta,a,K,t,recon_error,relative_error,vector_error,\
tail_bound,l1_norm,cost_metric,level,nodes,shift_identity_residual,regime_breach,seeds";

impl ValidationReport {
    pub fn csv_row(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.spec.family_name(),
            self.spec.param_fields(),
            fmt_f64(self.cutoff),
            fmt_f64(self.t),
            fmt_f64(self.recon_error),
            fmt_f64(self.relative_error),
            fmt_f64(self.vector_error),
            fmt_f64(self.tail_bound),
            fmt_f64(self.l1_norm),
            fmt_f64(self.cost_metric),
            self.quadrature_level,
            self.nodes,
            self.shift_identity_residual
                .map(fmt_f64)
                .unwrap_or_default(),
            self.regime_breach,
            seeds.join(" "),
        )
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kernel            {}", self.spec)?;
        writeln!(f, "K                 {}", self.cutoff)?;
        writeln!(f, "t                 {}", self.t)?;
        writeln!(f, "recon error       {:.6e}", self.recon_error)?;
        writeln!(f, "relative error    {:.6e}", self.relative_error)?;
        writeln!(f, "vector error      {:.6e}", self.vector_error)?;
        writeln!(f, "tail bound        {:.6e}", self.tail_bound)?;
        writeln!(f, "l1 norm           {:.12}", self.l1_norm)?;
        writeln!(f, "cost metric       {:.12}", self.cost_metric)?;
        writeln!(
            f,
            "quadrature        level {}, {} nodes",
            self.quadrature_level, self.nodes
        )?;
        if let Some(r) = self.shift_identity_residual {
            writeln!(f, "shift identity    {r:.3e}")?;
        }
        writeln!(f, "regime breach     {}", self.regime_breach)?;
        writeln!(f, "seeds             {:?}", self.seeds)?;
        for (stage, ms) in &self.timings {
            writeln!(f, "time {stage:<12} {ms:.1} ms")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning           {w}")?;
        }
        Ok(())
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Reconstruction error, tail, norm and cost for one problem.
pub fn validate(
    problem: &OdeProblem,
    spec: &KernelSpec,
    cutoff: f64,
    t: f64,
    tol: f64,
    seeds: &[u64],
) -> Result<ValidationReport> {
    let mut ladder = QuadratureLadder::for_problem(spec, cutoff, problem, t)?;
    validate_with(problem, &mut ladder, t, tol, seeds)
}

fn validate_with(
    problem: &OdeProblem,
    ladder: &mut QuadratureLadder,
    t: f64,
    tol: f64,
    seeds: &[u64],
) -> Result<ValidationReport> {
    check_tol(tol)?;
    let spec = *ladder.spec();
    let cutoff = ladder.cutoff();
    let mut timings = BTreeMap::new();
    let mut warnings: Vec<String> = regime_warning(problem, &spec, t).into_iter().collect();

    let start = Instant::now();
    let truth = true_propagator(problem, t, 0.1 * tol)?;
    warnings.extend(truth.warnings.iter().cloned());
    timings.insert("propagator".to_string(), elapsed_ms(start));

    let start = Instant::now();
    let recon = reconstruct_converged(problem, ladder, t, 0.1 * tol)?;
    timings.insert("reconstruct".to_string(), elapsed_ms(start));

    let diff = &truth.matrix - &recon.matrix;
    let recon_error = spectral_norm(&diff);
    let truth_norm = spectral_norm(&truth.matrix);
    let vector_error = diff.column(0).norm();

    let start = Instant::now();
    let l1_norm = weight_l1_norm(&spec, cutoff)?;
    let tail_bound = weight_tail_l1(&spec, cutoff)?;
    timings.insert("kernel norms".to_string(), elapsed_ms(start));

    Ok(ValidationReport {
        spec,
        cutoff,
        t,
        recon_error,
        relative_error: if truth_norm > 0.0 {
            recon_error / truth_norm
        } else {
            recon_error
        },
        vector_error,
        tail_bound,
        l1_norm,
        cost_metric: cutoff * l1_norm,
        quadrature_level: recon.level,
        nodes: recon.nodes,
        shift_identity_residual: None,
        regime_breach: false,
        seeds: seeds.to_vec(),
        timings,
        warnings,
    })
}

/// Validation in the unstable regime `L >= -lambda0` with a shifted glue kernel.
///
/// Besides the error against the true propagator, the report carries the
/// residual of the shifting identity: on the same nodes,
/// `e^{-a} sum_j w_j g_a(k_j) U_j(L, H)` must equal
/// `sum_j w_j g_0(k_j) U_j(L + (a/t) I, H)`.
pub fn validate_unstable(
    problem: &OdeProblem,
    spec: &KernelSpec,
    t: f64,
    cutoff: f64,
    tol: f64,
    mode: RegimeMode,
) -> Result<ValidationReport> {
    let KernelFamily::Glue(params) = spec.family else {
        return Err(LchsError::invalid(
            "spec",
            "unstable validation needs a glue kernel",
        ));
    };
    if params.a <= 0.0 {
        return Err(LchsError::invalid(
            "a",
            "unstable validation needs a shift a > 0",
        ));
    }
    if problem.lambda0() <= 0.0 {
        return Err(LchsError::Precondition(
            "unstable validation needs lambda0 > 0".into(),
        ));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(LchsError::invalid(
            "t",
            format!("{t} is not a positive time"),
        ));
    }
    let breach = problem.lambda0() * t > params.a * (1.0 + 1e-12);
    if breach && mode == RegimeMode::Strict {
        return Err(LchsError::Precondition(format!(
            "lambda0 * t = {} exceeds a = {}",
            problem.lambda0() * t,
            params.a
        )));
    }

    let mut ladder = QuadratureLadder::for_problem(spec, cutoff, problem, t)?;
    let mut report = validate_with(problem, &mut ladder, t, tol, &[])?;
    report.regime_breach = breach;

    let start = Instant::now();
    let scheme = ladder.level(report.quadrature_level)?.clone();
    let shifted =
        reconstruct_propagator(problem, &scheme, t, tol)? * Complex64::new((-params.a).exp(), 0.0);
    let stable = KernelSpec::glue(params.m, params.delta, 0.0)?.with_tol(spec.eval_tol)?;
    let stable_kernel = stable.kernel()?;
    let stable_coefficients = scheme
        .nodes
        .par_iter()
        .zip(&scheme.weights)
        .map(|(&k, &w)| stable_kernel.weight(k).map(|g| g * w))
        .collect::<Result<Vec<_>>>()?;
    let moved = problem.shifted(params.a / t);
    let reference = weighted_sum(&moved, &scheme.nodes, &stable_coefficients, t, tol)?;
    let scale = spectral_norm(&reference).max(f64::MIN_POSITIVE);
    report.shift_identity_residual = Some(spectral_norm(&(shifted - reference)) / scale);
    report
        .timings
        .insert("shift identity".to_string(), elapsed_ms(start));
    Ok(report)
}
