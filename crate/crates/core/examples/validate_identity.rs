//! Reconstructs the propagator of random stable 4x4 problems from unitaries.

use lchs::engine::validate;
use lchs::kernels::KernelSpec;
use lchs::metrics::EnsembleSpec;

fn main() -> lchs::Result<()> {
    let ensemble = EnsembleSpec::stable(4, 3, 1);
    let spec = KernelSpec::glue(2, 4.0, 0.0)?;
    for (i, problem) in ensemble.problems()?.iter().enumerate() {
        let report = validate(problem, &spec, 60.0, 1.0, 1e-10, &[ensemble.seed])?;
        println!("problem {i}\n{report}");
    }
    Ok(())
}
