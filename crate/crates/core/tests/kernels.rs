mod common;

use std::f64::consts::{E, PI};

use common::{boole, bump, bump_total, psi_with_total, simpson, simpson_c};
use lchs::kernels::{
    beta_weight, glue_psi, normalization, tabulate_weights, weight_l1_norm, BetaParams, GlueKernel,
    GlueParams, Kernel, KernelSpec,
};
use lchs::LchsError;
use num_complex::Complex64;

fn glue(m: u32, delta: f64, a: f64) -> GlueKernel {
    GlueKernel::new(GlueParams::new(m, delta, a).unwrap(), 1e-12).unwrap()
}

#[test]
fn psi_matches_boole_oracle() {
    for m in 1..=3 {
        let total = bump_total(m);
        for y in [0.05, 0.2, 0.37, 0.5, 0.81, 0.96] {
            let got = glue_psi(y, m, 1e-12).unwrap();
            let want = psi_with_total(y, m, total);
            assert!((got - want).abs() < 1e-10, "m={m} y={y}: {got} vs {want}");
        }
    }
}

#[test]
fn psi_symmetric_and_monotone() {
    let tol = 1e-12;
    for m in 1..=3 {
        let mut prev = -1.0;
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            let v = glue_psi(y, m, tol).unwrap();
            let w = glue_psi(1.0 - y, m, tol).unwrap();
            assert!((v + w - 1.0).abs() <= 10.0 * tol);
            assert!(v >= prev);
            prev = v;
        }
    }
}

#[test]
fn psi_domain_errors() {
    assert!(matches!(
        glue_psi(-0.1, 2, 1e-12),
        Err(LchsError::Domain { .. })
    ));
    assert!(matches!(
        glue_psi(1.5, 2, 1e-12),
        Err(LchsError::Domain { .. })
    ));
    assert!(glue_psi(0.5, 0, 1e-12).is_err());
}

#[test]
fn generating_function_branches() {
    let g = glue(2, 2.0, 0.0);
    assert!((g.generating_f(1.0).unwrap() - 0.367_879_441_2).abs() < 1e-10);
    assert_eq!(g.generating_f(-5.0).unwrap(), 0.0);
    assert!((g.generating_f(-1.0).unwrap() - 0.5 * E).abs() < 1e-12);
}

#[test]
fn generating_function_is_continuous_at_zone_edges() {
    for (m, delta, a) in [(2, 2.0, 0.0), (1, 4.0, 3.0), (3, 8.0, 0.5)] {
        let g = glue(m, delta, a);
        for edge in [-a, -a - delta] {
            let lo = g.generating_f(edge - 1e-9).unwrap();
            let hi = g.generating_f(edge + 1e-9).unwrap();
            assert!((lo - hi).abs() < 1e-7, "edge {edge}: {lo} vs {hi}");
        }
    }
}

#[test]
fn phi_vanishes_outside_zone() {
    let g = glue(2, 2.0, 0.0);
    assert_eq!(g.generating_phi(2.0), 0.0);
    assert_eq!(g.generating_phi(-3.0), 0.0);
    for i in 0..200 {
        assert_eq!(g.generating_phi(i as f64 * 0.05), 0.0);
    }
    let shifted = glue(2, 2.0, 3.0);
    for i in 0..200 {
        assert_eq!(shifted.generating_phi(-3.0 + i as f64 * 0.05), 0.0);
    }
}

#[test]
fn phi_matches_finite_difference_of_f() {
    let g = glue(2, 2.0, 0.0);
    let h = 1e-5;
    for x in [-1.0, -0.4, -1.7] {
        let f = |x: f64| g.generating_f(x).unwrap();
        let fd = f(x) + (f(x + h) - f(x - h)) / (2.0 * h);
        assert!((g.generating_phi(x) - fd).abs() <= 1e-8, "x={x}");
    }
}

#[test]
fn beta_weight_examples() {
    let p = BetaParams::new(0.8).unwrap();
    let g0 = beta_weight(0.0, &p);
    let expected = (2f64.powf(0.8) - 1.0).exp() / (2.0 * PI);
    assert!((g0.re - expected).abs() < 1e-15);
    assert_eq!(g0.im, 0.0);
    assert!((beta_weight(5.0, &p) - beta_weight(-5.0, &p).conj()).norm() < 1e-16);
}

#[test]
fn beta_weight_integrates_to_one_over_wide_window() {
    let p = BetaParams::new(0.8).unwrap();
    let total = simpson_c(&|k| beta_weight(k, &p), -1e4, 1e4, 4000, 1e-11);
    assert!((total - Complex64::new(1.0, 0.0)).norm() < 1e-9, "{total}");
}

#[test]
fn transition_integral_at_zero_matches_oracle() {
    let g = glue(2, 2.0, 0.0);
    // Integrating by parts: int psi((x+2)/2) e^{-x} dx = -1 + int_0^1 psi'(y) e^{2(1-y)} dy.
    let total = bump_total(2);
    let want = -1.0 + boole(&|y| bump(y, 2) * (2.0 * (1.0 - y)).exp(), 0.0, 1.0, 1 << 16) / total;
    let got = g.transition_integral(0.0).unwrap();
    assert!(got.re > 0.0);
    assert!((got.re - want).abs() < 1e-10, "{got} vs {want}");
    assert!(got.im.abs() < 1e-15);
}

#[test]
fn transition_integral_small_zone_and_conjugation() {
    let delta = 0.01;
    let g = glue(2, delta, 0.0);
    for k in [0.0, 3.0, 250.0] {
        assert!(g.transition_integral(k).unwrap().norm() <= delta * delta.exp());
    }
    let g = glue(2, 2.0, 0.0);
    let d = g.transition_integral(7.0).unwrap() - g.transition_integral(-7.0).unwrap().conj();
    assert!(d.norm() < 1e-14);
}

#[test]
fn glue_weight_agrees_with_closed_form_assembly() {
    for (m, delta, a) in [(1, 2.0, 0.0), (2, 4.0, 0.0), (3, 8.0, 0.0), (2, 2.0, 3.0)] {
        let g = glue(m, delta, a);
        for k in [0.0, 0.5, 3.0, -6.0, 12.0, 25.0] {
            let fast = g.weight(k).unwrap();
            let direct = g.weight_direct(k).unwrap();
            let scale = (a.exp() / (1.0 + k * k).sqrt()).max(fast.norm());
            assert!(
                (fast - direct).norm() <= 1e-11 * scale,
                "m={m} delta={delta} k={k}"
            );
        }
    }
}

#[test]
fn glue_weight_hermitian_at_twelve() {
    let g = glue(2, 2.0, 0.0);
    let d = g.weight(12.0).unwrap() - g.weight(-12.0).unwrap().conj();
    assert_eq!(d.norm(), 0.0);
}

#[test]
fn normalization_to_1e10() {
    for spec in [
        KernelSpec::beta(0.7).unwrap(),
        KernelSpec::glue(1, 2.0, 0.0).unwrap(),
        KernelSpec::glue(2, 8.0, 0.0).unwrap(),
    ] {
        let n = normalization(&spec).unwrap();
        assert!((n.value - 1.0).abs() <= 1e-10, "{spec}: {}", n.value);
        assert!(n.imaginary.abs() <= 1e-10);
        assert!(n.tail_bound < 1e-11);
    }
}

#[test]
fn glue_below_beta_beyond_thirty() {
    let g = KernelSpec::glue(2, 4.0, 0.0).unwrap().kernel().unwrap();
    let b = BetaParams::new(0.8).unwrap();
    for i in 0..=140 {
        let k = 30.0 + i as f64 * 0.5;
        for k in [k, -k] {
            assert!(
                g.weight(k).unwrap().norm() < beta_weight(k, &b).norm(),
                "k={k}"
            );
        }
    }
}

#[test]
fn tabulated_tables_are_hermitian() {
    let t = tabulate_weights(&KernelSpec::glue(2, 2.0, 0.0).unwrap(), &[-1.0, 0.0, 1.0]).unwrap();
    assert_eq!(t.len(), 3);
    assert!((t.values()[0] - t.values()[2].conj()).norm() < 1e-15);

    let spec = KernelSpec::beta(0.7).unwrap();
    let nodes: Vec<f64> = (0..1001).map(|i| -50.0 + 0.1 * i as f64).collect();
    let t = tabulate_weights(&spec, &nodes).unwrap();
    assert!(t.hermitian_residual().unwrap() <= 10.0 * spec.eval_tol);
}

#[test]
fn tabulation_reports_offending_node() {
    let spec = KernelSpec::glue(2, 2.0, 0.0).unwrap();
    let err = tabulate_weights(&spec, &[0.0, f64::NAN]).unwrap_err();
    assert!(matches!(
        err,
        LchsError::InvalidParameter { .. } | LchsError::AtNode { .. }
    ));
}

#[test]
fn fourier_sum_of_table_recovers_f() {
    let spec = KernelSpec::glue(2, 4.0, 0.0).unwrap();
    let h = 0.05;
    let nodes: Vec<f64> = (0..=2400).map(|i| -60.0 + h * i as f64).collect();
    let t = tabulate_weights(&spec, &nodes).unwrap();
    let x = 1.0;
    let sum: Complex64 = t
        .nodes()
        .iter()
        .zip(t.values())
        .enumerate()
        .map(|(i, (k, g))| {
            let w = if i == 0 || i == nodes.len() - 1 {
                0.5 * h
            } else {
                h
            };
            g * Complex64::new(0.0, -k * x).exp() * w
        })
        .sum();
    assert!((sum.re - (-x).exp()).abs() <= 1e-6, "{sum}");
    assert!(sum.im.abs() <= 1e-6);
}

#[test]
fn l1_norm_examples() {
    let spec = KernelSpec::glue(2, 4.0, 0.0).unwrap();
    assert!(weight_l1_norm(&spec, 20.0).unwrap() <= weight_l1_norm(&spec, 40.0).unwrap());

    let p = BetaParams::new(0.8).unwrap();
    let oracle = 2.0 * simpson(&|k| beta_weight(k, &p).norm(), 0.0, 100.0, 1e-13);
    let got = weight_l1_norm(&KernelSpec::beta(0.8).unwrap(), 100.0).unwrap();
    assert!((got - oracle).abs() <= 1e-8 * oracle, "{got} vs {oracle}");
}

#[test]
fn decay_bound_with_phi_prime_norm() {
    let g = glue(2, 2.0, 0.0);
    let c = g.phi_prime_l1().unwrap() / (2.0 * PI);
    for i in 0..=60 {
        let k = 10f64.powf(i as f64 / 20.0);
        let lhs = (g.weight(k).unwrap() * Complex64::new(1.0, -k)).norm();
        assert!(lhs <= c / k, "k={k}: {lhs} > {}", c / k);
    }
}

#[test]
fn tail_bounds_dominate_measured_tails() {
    for spec in [
        KernelSpec::beta(0.8).unwrap(),
        KernelSpec::glue(1, 2.0, 0.0).unwrap(),
    ] {
        let kernel: Kernel = spec.kernel().unwrap();
        let cutoff = 30.0;
        let measured = 2.0 * simpson(&|k| kernel.weight(k).unwrap().norm(), cutoff, 400.0, 1e-13);
        assert!(kernel.tail_bound(cutoff).unwrap() >= measured, "{spec}");
    }
}

proptest::proptest! {
    #[test]
    fn weights_are_hermitian(k in -200.0f64..200.0, b in 0.05f64..0.95, m in 1u32..=3, delta in 0.5f64..8.0) {
        let p = BetaParams::new(b).unwrap();
        proptest::prop_assert_eq!(beta_weight(-k, &p), beta_weight(k, &p).conj());
        let g = glue(m, delta, 0.0);
        proptest::prop_assert_eq!(g.weight(-k).unwrap(), g.weight(k).unwrap().conj());
    }

    #[test]
    fn psi_reflects(y in 0.0f64..=1.0, m in 1u32..=3) {
        let s = glue_psi(y, m, 1e-12).unwrap() + glue_psi(1.0 - y, m, 1e-12).unwrap();
        proptest::prop_assert!((s - 1.0).abs() <= 1e-11);
    }
}
