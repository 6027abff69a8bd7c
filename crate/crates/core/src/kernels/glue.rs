//! The glue-function kernel family.
//!
//! `F(x)` equals `e^{-x}` for `x >= -a`, vanishes below `-a - delta`, and on
//! the transition zone `[-a - delta, -a]` is `psi((x + a + delta) / delta) e^{-x}`
//! with the C-infinity switch
//!
//! ```text
//! psi(y) = c_g * integral_0^y exp(-1 / (p^m (1 - p)^m)) dp.
//! ```
//!
//! The weight `g(k) = f(k) / (1 - ik)` is the inverse Fourier transform of `F`.
//! Production evaluation goes through `f(k) = (1/2pi) integral Phi(x) e^{ikx} dx`
//! with `Phi = F + F'`, which is supported on the transition zone only. That
//! integral is taken along a path lifted into the upper half plane, where
//! `e^{ikx}` decays, so values far below the double-precision cancellation floor
//! of a real-axis quadrature stay accurate.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;

use super::GlueParams;
use crate::error::{LchsError, Result};
use crate::quadrature::{integrate, integrate_with_floor, Refinement};

const MAX_PANELS: usize = 1 << 15;

/// `4^m - 1 / (y (1 - y))^m`, the log of the glue derivative rescaled so its
/// peak at `y = 1/2` is zero.
///
/// With `w = (1 - 2y)^2` this is `4^m (1 - (1 - w)^{-m})`, evaluated through
/// `ln_1p`/`exp_m1` so large `m` does not lose digits to cancellation.
fn log_bump(y: f64, m: u32) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let w = (1.0 - 2.0 * y) * (1.0 - 2.0 * y);
    let peak = 4f64.powi(m as i32);
    -(peak * (-(m as f64) * (-w).ln_1p()).exp_m1())
}

fn cg_cache() -> &'static RwLock<HashMap<(u32, u64), f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(u32, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `ln c_g - 4^m` for sharpness `m`, integrated to relative tolerance `tol / 10`.
///
/// Working with the rescaled integrand `exp(log_bump)` (peak value 1) keeps
/// large `m` from underflowing.
fn log_normalization(m: u32, tol: f64) -> Result<f64> {
    let key = (m, tol.to_bits());
    if let Some(v) = cg_cache().read().expect("c_g cache poisoned").get(&key) {
        return Ok(*v);
    }
    let r = integrate(
        "glue normalization",
        |p: f64| log_bump(p, m).exp(),
        0.0,
        1.0,
        Refinement::relative(tol / 10.0)
            .with_start(8)
            .with_max_panels(MAX_PANELS),
    )?;
    let log_cg = -r.value.ln();
    let mut cache = cg_cache().write().expect("c_g cache poisoned");
    Ok(*cache.entry(key).or_insert(log_cg))
}

/// The normalized glue function `psi` and its derivatives for one sharpness `m`.
#[derive(Debug, Clone, Copy)]
pub struct GlueFunction {
    m: u32,
    tol: f64,
    /// `ln c_g - 4^m`.
    log_cg_scaled: f64,
}

impl GlueFunction {
    pub fn new(m: u32, tol: f64) -> Result<Self> {
        if m < 1 {
            return Err(LchsError::invalid("m", "glue order must be >= 1"));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(LchsError::invalid("tol", format!("{tol} is not positive")));
        }
        Ok(GlueFunction {
            m,
            tol,
            log_cg_scaled: log_normalization(m, tol)?,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `ln c_g`.
    pub fn log_cg(&self) -> f64 {
        self.log_cg_scaled + 4f64.powi(self.m as i32)
    }

    /// `psi(y)` with absolute error at most `tol`.
    pub fn value(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(LchsError::Domain {
                what: "glue function",
                value: y,
            });
        }
        // psi(y) + psi(1 - y) = 1; integrate over the shorter side.
        if y > 0.5 {
            return Ok(1.0 - self.lower_integral(1.0 - y)?);
        }
        self.lower_integral(y)
    }

    fn lower_integral(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        let (m, log_cg) = (self.m, self.log_cg_scaled);
        let r = integrate(
            "glue function",
            |p: f64| (log_cg + log_bump(p, m)).exp(),
            0.0,
            y,
            Refinement::relative(0.0)
                .with_abs(0.5 * self.tol)
                .with_start(4)
                .with_max_panels(MAX_PANELS),
        )?;
        Ok(r.value)
    }

    /// `psi'(y) = c_g exp(-1/(y(1-y))^m)`, zero at and outside the endpoints.
    pub fn derivative(&self, y: f64) -> f64 {
        if y <= 0.0 || y >= 1.0 {
            return 0.0;
        }
        (self.log_cg_scaled + log_bump(y, self.m)).exp()
    }

    /// `psi''(y) = psi'(y) m (1 - 2y) / (y(1-y))^{m+1}`.
    pub fn second_derivative(&self, y: f64) -> f64 {
        if y <= 0.0 || y >= 1.0 || y == 0.5 {
            return 0.0;
        }
        let q = y * (1.0 - y);
        let lin = 1.0 - 2.0 * y;
        let log_mag = self.log_cg_scaled + log_bump(y, self.m) + (self.m as f64 * lin.abs()).ln()
            - (self.m as f64 + 1.0) * q.ln();
        lin.signum() * log_mag.exp()
    }
}

/// `psi(y)` for sharpness `m` with absolute error at most `tol`.
pub fn glue_psi(y: f64, m: u32, tol: f64) -> Result<f64> {
    GlueFunction::new(m, tol)?.value(y)
}

/// A glue kernel: parameters plus the cached normalization.
#[derive(Debug, Clone, Copy)]
pub struct GlueKernel {
    params: GlueParams,
    psi: GlueFunction,
    tol: f64,
    /// Slope of the lifted integration path at its endpoints.
    lift: f64,
}

impl GlueKernel {
    pub fn new(params: GlueParams, tol: f64) -> Result<Self> {
        params.validate()?;
        let psi = GlueFunction::new(params.m, tol)?;
        // The saddle points of exp(-1/y^m + i w y) sit at angle pi/(2(m+1));
        // m * angle < pi/2 keeps Re(1/(y(1-y))^m) positive along the path.
        let lift = (PI / (2.0 * (params.m as f64 + 1.0))).tan();
        Ok(GlueKernel {
            params,
            psi,
            tol,
            lift,
        })
    }

    pub fn params(&self) -> &GlueParams {
        &self.params
    }

    pub fn glue(&self) -> &GlueFunction {
        &self.psi
    }

    fn zone_coordinate(&self, x: f64) -> f64 {
        (x + self.params.a + self.params.delta) / self.params.delta
    }

    /// `F(x)`.
    pub fn generating_f(&self, x: f64) -> Result<f64> {
        let GlueParams { a, delta, .. } = self.params;
        if x >= -a {
            Ok((-x).exp())
        } else if x >= -a - delta {
            Ok(self.psi.value(self.zone_coordinate(x).clamp(0.0, 1.0))? * (-x).exp())
        } else {
            Ok(0.0)
        }
    }

    /// `Phi(x) = F(x) + F'(x)`.
    ///
    /// On the zone `F' = (psi'/delta - psi) e^{-x}`, so the sum collapses to
    /// `psi'(y) e^{-x} / delta`. Outside the zone it is exactly zero.
    pub fn generating_phi(&self, x: f64) -> f64 {
        let GlueParams { a, delta, .. } = self.params;
        if x >= -a || x < -a - delta {
            return 0.0;
        }
        self.psi.derivative(self.zone_coordinate(x)) * (-x).exp() / delta
    }

    /// `Phi'(x) = (psi''(y)/delta^2 - psi'(y)/delta) e^{-x}`.
    pub fn generating_phi_prime(&self, x: f64) -> f64 {
        let GlueParams { a, delta, .. } = self.params;
        if x >= -a || x < -a - delta {
            return 0.0;
        }
        let y = self.zone_coordinate(x);
        (self.psi.second_derivative(y) / (delta * delta) - self.psi.derivative(y) / delta)
            * (-x).exp()
    }

    /// `integral |Phi'(x)| dx`, the constant in the `1/|k|` decay bound of `f`.
    pub fn phi_prime_l1(&self) -> Result<f64> {
        let GlueParams { a, delta, .. } = self.params;
        // |Phi'| has kinks where Phi' changes sign; doubling still converges,
        // only more slowly, so the tolerance here is looser than eval_tol.
        let r = integrate(
            "Phi' L1 norm",
            |x: f64| self.generating_phi_prime(x).abs(),
            -a - delta,
            -a,
            Refinement::relative(1e-10)
                .with_start(64)
                .with_max_panels(1 << 20),
        )?;
        Ok(r.value)
    }

    /// `integral_{-a-delta}^{-a} F(x) e^{ikx} dx` by composite Gauss-Legendre
    /// on the real axis, with `psi` evaluated by its own quadrature.
    pub fn transition_integral(&self, k: f64) -> Result<Complex64> {
        let GlueParams { a, delta, .. } = self.params;
        let tol = self.tol;
        let psi_tol = GlueFunction::new(self.params.m, tol * 1e-2)?;
        let panels = 4usize.max((k.abs() * delta / PI).ceil() as usize);
        let scale = (a + delta).exp() * delta;
        let mut failure = None;
        let r = integrate_with_floor(
            "transition integral",
            |x: f64| {
                let y = self.zone_coordinate(x).clamp(0.0, 1.0);
                let psi = match psi_tol.value(y) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                };
                Complex64::new(-x, k * x).exp() * psi
            },
            -a - delta,
            -a,
            Refinement::relative(tol)
                .with_abs(1e-16 * scale)
                .with_start(panels)
                .with_max_panels(MAX_PANELS),
            0.0,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(r.value),
        }
    }

    /// `g(k)` assembled from the closed-form exponential tail and the numeric
    /// transition integral:
    /// `g = (1/2pi) [ e^{a(1-ik)}/(1-ik) + transition_integral(k) ]`.
    pub fn weight_direct(&self, k: f64) -> Result<Complex64> {
        let one_minus_ik = Complex64::new(1.0, -k);
        let tail = (one_minus_ik * self.params.a).exp() / one_minus_ik;
        Ok((tail + self.transition_integral(k)?) / (2.0 * PI))
    }

    /// Point on the integration path and its derivative, `s` in [0, 1].
    ///
    /// The lifted path is the triangle `s + i lift min(s, 1 - s)`; a panel
    /// boundary always falls on its corner at `s = 1/2`.
    fn path(&self, s: f64, lifted: bool) -> (Complex64, Complex64) {
        if !lifted {
            return (Complex64::new(s, 0.0), Complex64::new(1.0, 0.0));
        }
        if s < 0.5 {
            (
                Complex64::new(s, self.lift * s),
                Complex64::new(1.0, self.lift),
            )
        } else {
            (
                Complex64::new(s, self.lift * (1.0 - s)),
                Complex64::new(1.0, -self.lift),
            )
        }
    }

    /// Exponent of the `f` integrand at path point `y`, for `k >= 0`.
    fn exponent(&self, y: Complex64, k: f64) -> Complex64 {
        let GlueParams { m, a, delta } = self.params;
        let q = y * (Complex64::new(1.0, 0.0) - y);
        let inv = q.powi(m as i32).inv();
        Complex64::new(self.psi.log_cg(), 0.0) - inv
            + Complex64::new(-1.0, k) * ((y - 1.0) * delta - a)
    }

    /// Lifting pays off once the oscillation `k delta` outgrows the bump's
    /// peak exponent `4^m`; below that the real axis has less cancellation.
    fn use_lift(&self, k: f64) -> bool {
        k * self.params.delta >= 2.0 * 4f64.powi(self.params.m as i32)
    }

    /// `f(k)`.
    pub fn kernel(&self, k: f64) -> Result<Complex64> {
        let kk = k.abs();
        let lifted = self.use_lift(kk);
        let r = integrate_with_floor(
            "glue kernel",
            |s: f64| {
                if s <= 0.0 || s >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let (y, dy) = self.path(s, lifted);
                let e = self.exponent(y, kk);
                if e.re < -745.0 {
                    return Complex64::new(0.0, 0.0);
                }
                e.exp() * dy
            },
            0.0,
            1.0,
            Refinement::relative(self.tol)
                .with_abs(1e-250)
                .with_start(16)
                .with_max_panels(MAX_PANELS),
            // exp of an exponent of size |E| carries ~|E| ulps of error; the
            // bump part of |E| reaches several hundred and the phase k (a + delta).
            1e-13 + 1e-15 * kk * (self.params.a + self.params.delta),
        )
        .map_err(|e| LchsError::AtNode {
            node: k,
            source: Box::new(e),
        })?;
        let f = r.value / (2.0 * PI);
        Ok(if k < 0.0 { f.conj() } else { f })
    }

    /// `g(k) = f(k) / (1 - ik)`.
    pub fn weight(&self, k: f64) -> Result<Complex64> {
        Ok(self.kernel(k)? / Complex64::new(1.0, -k))
    }

    /// Upper bound on `integral_{|k| > cutoff} |g(k)| dk`.
    ///
    /// Along the lifted path `|f(k)|` is bounded by an integral whose `k`
    /// dependence is `exp(-k delta v(s))`; integrating that over `k > cutoff`
    /// in closed form and using `|1 - ik| >= k` gives
    /// `(1/(pi cutoff)) integral exp(Re E_0 - cutoff delta v) |y'| / (delta v) ds`.
    pub fn tail_bound(&self, cutoff: f64) -> Result<f64> {
        if cutoff <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let delta = self.params.delta;
        let r = integrate(
            "glue tail bound",
            |s: f64| {
                if s <= 0.0 || s >= 1.0 {
                    return 0.0;
                }
                let (y, dy) = self.path(s, true);
                let e = self.exponent(y, cutoff);
                if e.re < -745.0 {
                    return 0.0;
                }
                e.re.exp() * dy.norm() / (delta * y.im)
            },
            0.0,
            1.0,
            Refinement::relative(1e-8)
                .with_start(16)
                .with_max_panels(MAX_PANELS),
        )?;
        // Quadrature slack on top of the analytic bound.
        Ok(r.value * (1.0 + 1e-6) / (PI * cutoff))
    }

    /// Oscillation rate of `g` in `k`: the support of `F`'s nonsmooth part
    /// reaches back to `-a - delta`.
    pub fn characteristic_frequency(&self) -> f64 {
        self.params.a + self.params.delta
    }
}
