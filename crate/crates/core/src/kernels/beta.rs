//! Closed-form stretched-exponential kernel
//! `f_beta(k) = e^{2^beta} e^{-(1+ik)^beta} / (2pi)`, `0 < beta < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::BetaParams;

/// `(1 + ik)^beta` on the principal branch.
fn principal_power(k: f64, beta: f64) -> Complex64 {
    let modulus_ln = 1f64.hypot(k).ln();
    let arg = k.atan2(1.0);
    Complex64::new(beta * modulus_ln, beta * arg).exp()
}

/// `f_beta(k)`.
pub fn beta_kernel(k: f64, params: &BetaParams) -> Complex64 {
    let beta = params.beta;
    let exponent = Complex64::new(2f64.powf(beta), 0.0) - principal_power(k, beta);
    exponent.exp() / (2.0 * PI)
}

/// `g(k) = f_beta(k) / (1 - ik)`.
pub fn beta_weight(k: f64, params: &BetaParams) -> Complex64 {
    beta_kernel(k, params) / Complex64::new(1.0, -k)
}

/// Upper bound on `integral_{|k| > cutoff} |g(k)| dk`.
///
/// Uses `Re (1+ik)^beta >= |k|^beta cos(beta pi/2)` and `|1 - ik| >= |k|`, then
/// `Gamma(s, x) <= x^{s-1} e^{-x} / (1 - (s-1)/x)` for `x > s - 1`.
/// Returns infinity where that inequality does not apply.
pub fn beta_tail_bound(cutoff: f64, params: &BetaParams) -> f64 {
    let beta = params.beta;
    if cutoff <= 0.0 {
        return f64::INFINITY;
    }
    let c = (beta * PI / 2.0).cos();
    let s = 1.0 / beta;
    let x = c * cutoff.powf(beta);
    if x <= s - 1.0 {
        return f64::INFINITY;
    }
    let upper_gamma = ((s - 1.0) * x.ln() - x).exp() / (1.0 - (s - 1.0) / x);
    let one_side = 2f64.powf(beta).exp() / (2.0 * PI * cutoff) * s * c.powf(-s) * upper_gamma;
    2.0 * one_side
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        let p = BetaParams::new(0.8).unwrap();
        let g = beta_weight(0.0, &p);
        let expected = (2f64.powf(0.8) - 1.0).exp() / (2.0 * PI);
        assert!((g.re - expected).abs() < 1e-15);
        assert!((g.re - 0.333_946_011_990_706_7).abs() < 1e-15);
        assert_eq!(g.im, 0.0);
    }

    #[test]
    fn conjugate_symmetry() {
        let p = BetaParams::new(0.8).unwrap();
        let d = beta_weight(5.0, &p) - beta_weight(-5.0, &p).conj();
        assert!(d.norm() < 1e-16);
    }

    #[test]
    fn magnitude_decays_like_stretched_exponential() {
        let p = BetaParams::new(0.5).unwrap();
        let k: f64 = 400.0;
        let bound = 2f64.powf(0.5).exp() * (-(k.sqrt()) * (PI / 4.0).cos()).exp() / (2.0 * PI * k);
        assert!(beta_weight(k, &p).norm() <= bound);
    }

    #[test]
    fn tail_bound_shrinks_with_cutoff() {
        let p = BetaParams::new(0.7).unwrap();
        assert!(beta_tail_bound(400.0, &p) < 1e-12);
        assert!(beta_tail_bound(200.0, &p) > beta_tail_bound(400.0, &p));
        assert!(beta_tail_bound(1e-3, &p).is_infinite());
    }
}
