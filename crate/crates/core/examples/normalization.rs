//! Integrates each weight over the real line; every kernel must give 1.

use lchs::kernels::{normalization, KernelSpec};

fn main() -> lchs::Result<()> {
    for spec in [
        KernelSpec::beta(0.7)?,
        KernelSpec::beta(0.8)?,
        KernelSpec::glue(1, 2.0, 0.0)?,
        KernelSpec::glue(2, 4.0, 0.0)?,
        KernelSpec::glue(3, 8.0, 0.0)?,
    ] {
        let n = normalization(&spec)?;
        println!(
            "{spec}: integral = {:.15} (window {}, tail <= {:.1e})",
            n.value, n.window, n.tail_bound
        );
    }
    Ok(())
}
