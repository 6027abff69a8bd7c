//! Kernel construction and classical validation for linear combination of
//! Hamiltonian simulation (LCHS).
//!
//! The LCHS identity writes the non-unitary propagator of `du/dt = -A(t) u` as
//!
//! ```text
//! T exp(-int_0^t A) = int_R g(k) T exp(-i int_0^t (k L + H)) dk,   A = L + iH,
//! ```
//!
//! with a weight `g(k) = f(k) / (1 - ik)` whose Fourier transform equals `e^{-x}`
//! on the half line the dynamics can reach. This crate builds such weights,
//! reconstructs propagators from them on dense matrices, and measures how
//! far the integral must be truncated for a given accuracy.
//!
//! * [`kernels`]: weight functions and their norms.
//! * [`propagators`]: exact time-ordered and Hamiltonian propagators.
//! * [`engine`]: quadrature of the identity, truncation error, observables.
//! * [`metrics`]: random ensembles, minimal truncation `K`, cost metric, decay fits.
//! * [`cli`]: the `lchs` command-line front end.

pub mod cli;
pub mod engine;
pub mod error;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod propagators;
pub mod quadrature;

pub use error::{LchsError, Result};
pub use kernels::{KernelFamily, KernelSpec};
