//! Minimum K per kernel over a seeded ensemble, and the glue improvement factor.

use lchs::kernels::KernelSpec;
use lchs::metrics::{min_truncation_k_multi, EnsembleSpec, SearchOptions};

fn main() -> lchs::Result<()> {
    let problems = EnsembleSpec::stable(4, 20, 1).problems()?;
    let eps = [1e-4, 1e-6, 1e-8];
    let mut at_1e8 = Vec::new();
    for spec in [KernelSpec::beta(0.8)?, KernelSpec::glue(2, 8.0, 0.0)?] {
        let results =
            min_truncation_k_multi(&spec, &eps, &problems, 1.0, SearchOptions::default())?;
        for r in &results {
            println!(
                "{spec}: eps {:.0e} -> K_min {:.3} (error {:.2e})",
                r.epsilon,
                r.k_min,
                r.error_at_min()
            );
        }
        at_1e8.push(results[2].k_min);
    }
    println!(
        "K_min ratio beta / glue at 1e-8: {:.2}",
        at_1e8[0] / at_1e8[1]
    );
    Ok(())
}
