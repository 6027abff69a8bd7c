//! Observable u(t)^dagger O u(t) from the LCHS sum against the true state.

use lchs::engine::estimate_observable;
use lchs::kernels::KernelSpec;
use lchs::linalg::{CMat, CVec};
use lchs::metrics::{random_problem, EnsembleSpec};
use lchs::propagators::true_propagator;
use num_complex::Complex64;

fn main() -> lchs::Result<()> {
    let problem = random_problem(&EnsembleSpec::stable(4, 1, 11), 0)?;
    let u0 = CVec::from_fn(4, |i, _| Complex64::new(1.0, i as f64) / 4.0);
    let observable = CMat::from_fn(4, 4, |i, j| {
        Complex64::new((i + j) as f64, i as f64 - j as f64)
    });
    let spec = KernelSpec::glue(2, 4.0, 0.0)?;

    let estimate = estimate_observable(&problem, &spec, 60.0, 1.0, &u0, &observable, 1e-10)?;
    let u = true_propagator(&problem, 1.0, 1e-12)?.matrix * &u0;
    let exact = u.dotc(&(&observable * &u)).re;
    println!(
        "estimate {estimate:.15}\nexact    {exact:.15}\nerror    {:.2e}",
        (estimate - exact).abs()
    );
    Ok(())
}
