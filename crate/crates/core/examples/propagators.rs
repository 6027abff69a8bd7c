//! True propagator of a time-dependent problem against the LCHS building blocks.

use std::sync::Arc;

use lchs::linalg::{spectral_norm, unitarity_residual, CMat};
use lchs::propagators::{hamiltonian_propagator, true_propagator, OdeProblem};
use num_complex::Complex64;

fn main() -> lchs::Result<()> {
    // A(t) = (1 + t) I + i t sigma_x: L = (1 + t) I >= 0.
    let sigma_x = CMat::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]);
    let a = move |t: f64| {
        CMat::identity(2, 2) * Complex64::new(1.0 + t, 0.0) + &sigma_x * Complex64::new(0.0, t)
    };
    let problem = OdeProblem::time_dependent(2, Arc::new(a), 0.0)?;

    let u = true_propagator(&problem, 1.0, 1e-10)?;
    println!(
        "T exp(-int A): {} steps, est. error {:.2e}, norm {:.6}",
        u.steps_used,
        u.est_error,
        spectral_norm(&u.matrix)
    );

    for k in [0.0, 5.0, 25.0] {
        let v = hamiltonian_propagator(&problem, k, 1.0, 1e-10)?;
        println!(
            "k = {k:>4}: {} steps, unitarity residual {:.1e}",
            v.steps_used,
            unitarity_residual(&v.matrix)
        );
    }
    Ok(())
}
