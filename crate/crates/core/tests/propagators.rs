mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{
    random_hermitian, random_matrix, random_vector, rk4_propagator, rng, svd_norm, taylor_expm,
};
use lchs::linalg::{
    expm_general, expm_hermitian_unitary, min_eigenvalue, unitarity_residual, CMat, EXPM_NORM_CAP,
};
use lchs::propagators::{cartesian_decompose, hamiltonian_propagator, true_propagator, OdeProblem};
use lchs::LchsError;
use num_complex::Complex64;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random `A` with `L` shifted to be positive semidefinite.
fn stable_matrix(seed: u64, n: usize) -> CMat {
    let mut r = rng(seed);
    let a = random_matrix(&mut r, n, 0.5);
    let (l, _) = cartesian_decompose(&a).unwrap();
    let shift = (-min_eigenvalue(&l)).max(0.0);
    a + CMat::identity(n, n) * c(shift)
}

#[test]
fn decomposition_examples() {
    let (l, h) = cartesian_decompose(&CMat::identity(3, 3)).unwrap();
    assert_eq!(l, CMat::identity(3, 3));
    assert_eq!(max_abs(&h), 0.0);

    let (l, h) = cartesian_decompose(&(CMat::identity(3, 3) * Complex64::i())).unwrap();
    assert_eq!(max_abs(&l), 0.0);
    assert!(max_abs(&(h - CMat::identity(3, 3))) < 1e-16);

    let a = random_matrix(&mut rng(3), 4, 1.0);
    let (l, h) = cartesian_decompose(&a).unwrap();
    assert!(svd_norm(&(&l + &h * Complex64::i() - &a)) <= 1e-14 * svd_norm(&a));
    assert_eq!(max_abs(&(&l - l.adjoint())), 0.0);
    assert_eq!(max_abs(&(&h - h.adjoint())), 0.0);

    assert!(cartesian_decompose(&CMat::zeros(2, 3)).is_err());
}

#[test]
fn expm_examples() {
    assert_eq!(
        expm_general(&CMat::zeros(3, 3)).unwrap(),
        CMat::identity(3, 3)
    );
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0), c(-2.0)]));
    let e = expm_general(&d).unwrap();
    assert!((e[(0, 0)].re - (-1f64).exp()).abs() < 1e-15);
    assert!((e[(1, 1)].re - (-2f64).exp()).abs() < 1e-15);
    assert_eq!(e[(0, 1)], c(0.0));
}

#[test]
fn expm_matches_taylor_oracle() {
    let mut r = rng(11);
    for _ in 0..20 {
        let mut m = random_matrix(&mut r, 3, 1.0);
        let n = svd_norm(&m);
        m /= c(n.max(1.0));
        let diff = svd_norm(&(expm_general(&m).unwrap() - taylor_expm(&m)));
        assert!(diff <= 1e-12, "{diff}");
    }
}

#[test]
fn expm_rejects_oversized_input() {
    let m = CMat::identity(2, 2) * c(2.0 * EXPM_NORM_CAP);
    assert!(expm_general(&m).is_err());
}

#[test]
fn hermitian_unitary_examples() {
    let mut r = rng(5);
    let h = random_hermitian(&mut r, 4);
    let (u, w) = expm_hermitian_unitary(&h, 0.0).unwrap();
    assert!(w.is_none());
    assert!(max_abs(&(u - CMat::identity(4, 4))) < 1e-15);

    let (u, _) = expm_hermitian_unitary(&(CMat::identity(1, 1) * c(PI)), 1.0).unwrap();
    assert!((u[(0, 0)] - c(-1.0)).norm() < 1e-15);

    for tau in [0.3, 1.0, 2.5] {
        let (u, _) = expm_hermitian_unitary(&h, tau).unwrap();
        assert!(unitarity_residual(&u) <= 1e-12);
        let v = expm_general(&(&h * Complex64::new(0.0, -tau))).unwrap();
        assert!(svd_norm(&(u - v)) <= 1e-10);
    }
}

#[test]
fn hermitian_unitary_input_checks() {
    let mut r = rng(6);
    let mut h = random_hermitian(&mut r, 3);
    h[(0, 1)] += c(1e-10);
    let (_, w) = expm_hermitian_unitary(&h, 1.0).unwrap();
    assert!(w.is_some());
    h[(0, 1)] += c(1e-3);
    assert!(matches!(
        expm_hermitian_unitary(&h, 1.0),
        Err(LchsError::NotHermitian { .. })
    ));
}

#[test]
fn true_propagator_examples() {
    let p = OdeProblem::scalar(c(1.0));
    let u = true_propagator(&p, 1.0, 1e-12).unwrap();
    assert!((u.matrix[(0, 0)] - c(0.367_879_441_171_442_3)).norm() < 1e-15);

    let p = OdeProblem::time_dependent(2, Arc::new(|t| CMat::identity(2, 2) * c(1.0 + t)), 0.0)
        .unwrap();
    let u = true_propagator(&p, 1.0, 1e-12).unwrap();
    assert!(svd_norm(&(u.matrix - CMat::identity(2, 2) * c((-1.5f64).exp()))) < 1e-12);
    assert!(u.est_error < 1e-12);
}

#[test]
fn true_propagator_matches_rk4_oracle() {
    for seed in [1, 2, 3] {
        let a = stable_matrix(seed, 4);
        let p = OdeProblem::constant(a.clone(), 0.0).unwrap();
        let u = true_propagator(&p, 1.0, 1e-12).unwrap().matrix;
        let oracle = rk4_propagator(&a, 1.0, 4000);
        assert!(svd_norm(&(u - oracle)) <= 1e-8);
    }
}

#[test]
fn time_dependent_propagator_matches_rk4_oracle() {
    let mut r = rng(21);
    let a0 = stable_matrix(21, 3);
    let b = random_hermitian(&mut r, 3) * Complex64::i();
    let f = move |t: f64| &a0 + &b * c((2.0 * t).sin());
    let p = OdeProblem::time_dependent(3, Arc::new(f.clone()), 0.0).unwrap();
    let u = true_propagator(&p, 1.0, 1e-9).unwrap();

    // Non-autonomous RK4 on the basis vectors.
    let steps = 4000;
    let h = 1.0 / steps as f64;
    let mut oracle = CMat::identity(3, 3);
    for j in 0..steps {
        let t = j as f64 * h;
        let g = |s: f64, y: &CMat| -(f(s) * y);
        let k1 = g(t, &oracle);
        let k2 = g(t + 0.5 * h, &(&oracle + &k1 * c(0.5 * h)));
        let k3 = g(t + 0.5 * h, &(&oracle + &k2 * c(0.5 * h)));
        let k4 = g(t + h, &(&oracle + &k3 * c(h)));
        oracle += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    }
    assert!(svd_norm(&(u.matrix - oracle)) <= 1e-8);
}

#[test]
fn hamiltonian_propagator_examples() {
    let p = OdeProblem::scalar(c(1.0));
    for (k, t) in [(0.0, 1.0), (2.5, 0.4), (-7.0, 1.3)] {
        let u = hamiltonian_propagator(&p, k, t, 1e-12).unwrap();
        assert!((u.matrix[(0, 0)] - Complex64::new(0.0, -k * t).exp()).norm() < 1e-14);
    }

    let a = random_matrix(&mut rng(8), 4, 0.5);
    let p = OdeProblem::constant_auto(a.clone()).unwrap();
    let (_, h) = cartesian_decompose(&a).unwrap();
    let u = hamiltonian_propagator(&p, 0.0, 0.9, 1e-12).unwrap().matrix;
    let (v, _) = expm_hermitian_unitary(&h, 0.9).unwrap();
    assert!(svd_norm(&(u - v)) < 1e-14);

    let u = hamiltonian_propagator(&p, 17.3, 0.7, 1e-12).unwrap().matrix;
    assert!(unitarity_residual(&u) <= 1e-11);
}

#[test]
fn time_dependent_hamiltonian_propagator_is_unitary() {
    let mut r = rng(31);
    let a0 = random_matrix(&mut r, 3, 0.5);
    let b = random_matrix(&mut r, 3, 0.5);
    let f = move |t: f64| &a0 + &b * c(t.cos());
    let p = OdeProblem::time_dependent(3, Arc::new(f), 2.0).unwrap();
    let tol = 1e-9;
    let u = hamiltonian_propagator(&p, 3.0, 1.0, tol).unwrap();
    assert!(u.est_error < tol);
    assert!(unitarity_residual(&u.matrix) <= 10.0 * tol);
}

#[test]
fn semigroup_property() {
    for seed in [4, 5, 6] {
        let a = random_matrix(&mut rng(seed), 4, 1.0);
        let p = OdeProblem::constant_auto(a).unwrap();
        let u1 = true_propagator(&p, 0.5, 1e-12).unwrap().matrix;
        let u = true_propagator(&p, 1.0, 1e-12).unwrap().matrix;
        assert!(svd_norm(&(&u1 * &u1 - u)) <= 1e-10);
    }
}

#[test]
fn hamiltonian_propagators_preserve_norm() {
    let a = random_matrix(&mut rng(9), 4, 1.0);
    let p = OdeProblem::constant_auto(a).unwrap();
    let mut r = rng(10);
    for k in [-40.0, -3.3, 0.0, 1.0, 25.0] {
        let u = hamiltonian_propagator(&p, k, 1.2, 1e-12).unwrap().matrix;
        for _ in 0..5 {
            let v = random_vector(&mut r, 4);
            assert!(((&u * &v).norm() - v.norm()).abs() <= 1e-11 * v.norm());
        }
    }
}

#[test]
fn step_halving_is_second_order() {
    let mut r = rng(41);
    let a0 = stable_matrix(41, 3);
    let b = random_hermitian(&mut r, 3) * Complex64::i();
    let f = move |t: f64| &a0 + &b * c(3.0 * t);
    let p = OdeProblem::time_dependent(3, Arc::new(f), 0.0).unwrap();
    let mut by_steps = std::collections::BTreeMap::new();
    for e in 1..=10 {
        let res = true_propagator(&p, 1.0, 10f64.powi(-e)).unwrap();
        by_steps.insert(res.steps_used, res.est_error);
    }
    let runs: Vec<(usize, f64)> = by_steps.into_iter().collect();
    assert!(runs.len() >= 4);
    for w in runs.windows(2) {
        if w[1].0 == 2 * w[0].0 {
            let ratio = w[0].1 / w[1].1;
            assert!(
                ratio >= 3.0,
                "{} -> {} steps: ratio {ratio}",
                w[0].0,
                w[1].0
            );
        }
    }
}

#[test]
fn stable_propagators_are_contractive() {
    for seed in 50..60 {
        let a = stable_matrix(seed, 4);
        let p = OdeProblem::constant(a, 0.0).unwrap();
        for t in [0.3, 1.0, 4.0] {
            let tol = 1e-12;
            let u = true_propagator(&p, t, tol).unwrap().matrix;
            assert!(svd_norm(&u) <= 1.0 + tol);
        }
    }
}

#[test]
fn constant_problem_rejects_wrong_lambda0() {
    let a = CMat::identity(2, 2) * c(-1.0);
    assert!(OdeProblem::constant(a.clone(), 0.5).is_err());
    assert!(OdeProblem::constant(a, 1.0).is_ok());
}

#[test]
fn negative_time_is_rejected() {
    let p = OdeProblem::scalar(c(1.0));
    assert!(true_propagator(&p, -1.0, 1e-10).is_err());
    assert!(hamiltonian_propagator(&p, 1.0, -1.0, 1e-10).is_err());
}
