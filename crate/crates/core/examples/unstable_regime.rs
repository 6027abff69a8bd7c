//! Growth e^t reconstructed with a shifted glue kernel, inside and beyond t = a / lambda0.

use lchs::engine::{validate_unstable, RegimeMode};
use lchs::kernels::KernelSpec;
use lchs::linalg::CMat;
use lchs::propagators::OdeProblem;
use num_complex::Complex64;

fn main() -> lchs::Result<()> {
    let problem = OdeProblem::constant(CMat::identity(1, 1) * Complex64::new(-1.0, 0.0), 1.0)?;
    let spec = KernelSpec::glue(2, 2.0, 3.0)?;
    for t in [1.0, 2.0, 3.0, 4.0] {
        let r = validate_unstable(&problem, &spec, t, 80.0, 1e-10, RegimeMode::Diagnostic)?;
        println!(
            "t = {t}: relative error {:.3e}, shift identity {:.1e}, breach {}",
            r.relative_error,
            r.shift_identity_residual.unwrap_or(f64::NAN),
            r.regime_breach
        );
    }
    Ok(())
}
