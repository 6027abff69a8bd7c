//! Stretched-exponential fits of |g(k)|, and the drifting exponential rate of glue kernels.

use lchs::kernels::KernelSpec;
use lchs::metrics::{decay_diagnostic, decay_diagnostic_fixed};

fn main() -> lchs::Result<()> {
    for b in [0.5, 0.7, 0.8] {
        let fit = decay_diagnostic(&KernelSpec::beta(b)?, 500.0)?;
        println!(
            "beta {b}: p = {:.3}, c = {:.3} (cos(beta pi/2) = {:.3}), rms {:.1e}",
            fit.exponent,
            fit.rate,
            (b * std::f64::consts::FRAC_PI_2).cos(),
            fit.residual
        );
    }
    let glue = KernelSpec::glue(2, 4.0, 0.0)?;
    for k_max in [125.0, 250.0, 500.0, 1000.0] {
        let fit = decay_diagnostic_fixed(&glue, k_max, 1.0)?;
        println!(
            "{glue}: exponential rate on [{}, {k_max}] = {:.4}",
            k_max / 10.0,
            fit.rate
        );
    }
    Ok(())
}
