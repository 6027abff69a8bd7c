//! Fixed-order Gauss-Legendre panels with panel-doubling refinement.
//!
//! Every integral in the crate goes through [`GaussLegendre::composite`] or
//! [`integrate`]: the interval is split into equal panels, each panel gets the
//! same 32-point rule, and the panel count doubles until two successive
//! estimates agree.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{LchsError, Result};

/// Order of the per-panel rule used throughout the crate.
pub const GL_ORDER: usize = 32;

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th root, counted from the right.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Single panel on [a, b].
    pub fn panel<T: QuadValue, F: FnMut(f64) -> T>(&self, mut f: F, a: f64, b: f64) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// `panels` equal panels on [a, b].
    pub fn composite<T: QuadValue, F: FnMut(f64) -> T>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> T {
        let h = (b - a) / panels as f64;
        let mut acc = T::zero();
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            acc = acc + self.panel(&mut f, lo, hi);
        }
        acc
    }

    /// Absolute nodes and weights of the composite rule, in increasing order.
    pub fn composite_nodes(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.order());
        let mut ws = Vec::with_capacity(panels * self.order());
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + half * x);
                ws.push(w * half);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The shared 32-point rule.
pub fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(GL_ORDER))
}

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Refinement {
    pub start_panels: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Refinement {
    pub fn relative(rel_tol: f64) -> Self {
        Refinement {
            start_panels: 4,
            rel_tol,
            abs_tol: 0.0,
            max_panels: 1 << 16,
        }
    }

    pub fn with_start(mut self, panels: usize) -> Self {
        self.start_panels = panels.max(1);
        self
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub panels: usize,
}

/// Composite Gauss-Legendre with panel doubling until
/// `|I_2n - I_n| <= max(rel_tol * |I_2n|, abs_tol)`.
pub fn integrate<T, F>(
    what: &str,
    mut f: F,
    a: f64,
    b: f64,
    rule: Refinement,
) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let gl = gl32();
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error_estimate: 0.0,
            panels: 0,
        });
    }
    let mut panels = rule.start_panels.max(1);
    let mut prev = gl.composite(&mut f, a, b, panels);
    loop {
        let next_panels = panels * 2;
        if next_panels > rule.max_panels {
            return Err(LchsError::Convergence {
                what: what.to_string(),
                previous: prev.magnitude(),
                last: prev.magnitude(),
            });
        }
        let next = gl.composite(&mut f, a, b, next_panels);
        let diff = (next + prev * -1.0).magnitude();
        if diff <= (rule.rel_tol * next.magnitude()).max(rule.abs_tol) {
            return Ok(QuadResult {
                value: next,
                error_estimate: diff,
                panels: next_panels,
            });
        }
        if !diff.is_finite() {
            return Err(LchsError::Convergence {
                what: what.to_string(),
                previous: prev.magnitude(),
                last: next.magnitude(),
            });
        }
        prev = next;
        panels = next_panels;
    }
}

/// Like [`integrate`], but the absolute tolerance is raised to
/// `floor_rel * integral of |f|`, the level below which rounding in the
/// panel sums dominates.
pub fn integrate_with_floor<F>(
    what: &str,
    mut f: F,
    a: f64,
    b: f64,
    rule: Refinement,
    floor_rel: f64,
) -> Result<QuadResult<Complex64>>
where
    F: FnMut(f64) -> Complex64,
{
    let gl = gl32();
    let mut both = |panels: usize| {
        let h = (b - a) / panels as f64;
        let mut v = Complex64::new(0.0, 0.0);
        let mut abs_integral = 0.0;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in gl.nodes().iter().zip(gl.weights()) {
                let z = f(mid + half * x);
                v += z * (w * half);
                abs_integral += z.norm() * (w * half);
            }
        }
        (v, abs_integral)
    };
    let mut panels = rule.start_panels.max(1);
    let (mut prev, _) = both(panels);
    let mut before = prev;
    loop {
        let next_panels = panels * 2;
        if next_panels > rule.max_panels {
            return Err(LchsError::Convergence {
                what: what.to_string(),
                previous: before.norm(),
                last: prev.norm(),
            });
        }
        let (next, abs_integral) = both(next_panels);
        let diff = (next - prev).norm();
        let tol = (rule.rel_tol * next.norm())
            .max(rule.abs_tol)
            .max(floor_rel * abs_integral);
        if diff <= tol {
            return Ok(QuadResult {
                value: next,
                error_estimate: diff,
                panels: next_panels,
            });
        }
        before = prev;
        prev = next;
        panels = next_panels;
    }
}

/// Composite rule with integrand evaluations spread over the rayon pool.
/// Values are summed sequentially in node order, so the result does not depend
/// on scheduling.
pub fn par_composite<T, F>(f: F, a: f64, b: f64, panels: usize) -> Result<T>
where
    T: QuadValue + Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    let (xs, ws) = gl32().composite_nodes(a, b, panels);
    let values: Vec<T> = xs.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    Ok(values
        .iter()
        .zip(&ws)
        .fold(T::zero(), |acc, (v, w)| acc + *v * *w))
}

/// [`integrate`] on top of [`par_composite`].
pub fn par_integrate<T, F>(
    what: &str,
    f: F,
    a: f64,
    b: f64,
    rule: Refinement,
) -> Result<QuadResult<T>>
where
    T: QuadValue + Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error_estimate: 0.0,
            panels: 0,
        });
    }
    let mut panels = rule.start_panels.max(1);
    let mut prev = par_composite(&f, a, b, panels)?;
    loop {
        let next_panels = panels * 2;
        if next_panels > rule.max_panels {
            return Err(LchsError::Convergence {
                what: what.to_string(),
                previous: prev.magnitude(),
                last: prev.magnitude(),
            });
        }
        let next = par_composite(&f, a, b, next_panels)?;
        let diff = (next + prev * -1.0).magnitude();
        if diff <= (rule.rel_tol * next.magnitude()).max(rule.abs_tol) {
            return Ok(QuadResult {
                value: next,
                error_estimate: diff,
                panels: next_panels,
            });
        }
        prev = next;
        panels = next_panels;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_high_degree_polynomials_exactly() {
        let gl = gl32();
        let weight_sum: f64 = gl.weights().iter().sum();
        assert!((weight_sum - 2.0).abs() < 1e-14);
        // degree 62 monomial on [-1, 1]
        let v = gl.panel(|x| x.powi(62), -1.0, 1.0);
        assert!((v - 2.0 / 63.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let gl = GaussLegendre::new(7);
        for i in 0..7 {
            assert!((gl.nodes()[i] + gl.nodes()[6 - i]).abs() < 1e-15);
        }
        assert!(gl.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn doubling_converges_on_oscillatory_integrand() {
        let r = integrate(
            "cos",
            |x: f64| (20.0 * x).cos(),
            0.0,
            3.0,
            Refinement::relative(1e-13),
        )
        .unwrap();
        assert!((r.value - (60.0f64).sin() / 20.0).abs() < 1e-13);
    }

    #[test]
    fn panel_cap_reports_failure() {
        let rule = Refinement::relative(1e-15).with_max_panels(8);
        let err = integrate("kink", |x: f64| x.abs().sqrt(), -1.0, 1.0, rule).unwrap_err();
        assert!(err.is_convergence());
    }
}
