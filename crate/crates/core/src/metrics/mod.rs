//! Random problem ensembles, minimum truncation `K`, the cost metric
//! `K integral |g|` and empirical decay fits.

mod decay;
mod ensemble;
mod min_k;

pub use decay::{decay_diagnostic, decay_diagnostic_fixed, DecayFit};
pub use ensemble::{random_problem, EnsembleKind, EnsembleSpec};
pub use min_k::{
    cost_metric, min_truncation_k, min_truncation_k_for, min_truncation_k_multi, MinKResult,
    SearchOptions, TruncationCurve, DEFAULT_K_CAP, GRID_RESOLUTION, MIN_EPSILON,
};

/// Column names of a minimum-`K` row.
pub const MIN_K_CSV_HEADER: &str = "epsilon,K_min,family,beta,m,delta,a";

/// Column names of a cost row.
pub const COST_CSV_HEADER: &str = "K,l1,metric,family,beta,m,delta,a";
