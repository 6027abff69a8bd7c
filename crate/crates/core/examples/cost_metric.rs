//! Cost metric K * ||g||_1 on [-K, K] for several cutoffs.

use lchs::kernels::{weight_l1_norm, KernelSpec};
use lchs::metrics::cost_metric;

fn main() -> lchs::Result<()> {
    for spec in [KernelSpec::beta(0.8)?, KernelSpec::glue(1, 2.0, 0.0)?] {
        for k in [10.0, 20.0, 40.0, 80.0] {
            println!(
                "{spec}: K {k:>4}  l1 {:.10}  metric {:.6}",
                weight_l1_norm(&spec, k)?,
                cost_metric(&spec, k)?
            );
        }
    }
    Ok(())
}
