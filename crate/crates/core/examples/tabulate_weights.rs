//! Tabulates glue and beta weights on a small grid and prints their magnitudes.

use lchs::kernels::{tabulate_weights, KernelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nodes: Vec<f64> = (0..=10).map(|i| 5.0 * i as f64).collect();
    let glue = tabulate_weights(&KernelSpec::glue(2, 4.0, 0.0)?, &nodes)?;
    let beta = tabulate_weights(&KernelSpec::beta(0.8)?, &nodes)?;
    println!("{:>6} {:>14} {:>14}", "k", "|g_glue|", "|g_beta|");
    for ((k, g), b) in nodes.iter().zip(glue.values()).zip(beta.values()) {
        println!("{k:>6.1} {:>14.6e} {:>14.6e}", g.norm(), b.norm());
    }
    glue.write_csv(&mut std::io::stdout())?;
    Ok(())
}
