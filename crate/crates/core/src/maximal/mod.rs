//! The maximal function `μ_H`, its resolving collection, the constant `C₁`
//! and the Carleson-ratio supremum.

mod mu;
mod sup;

pub use mu::{
    mu, mu_exact, mu_grid_integral, mu_integral, mu_integral_by_tree, resolve, sigma_ratio,
    witness_f, witness_image_norms, MaximalReport,
};
pub use sup::{
    c1, carleson_ratio_sup, SupMode, SupResult, DEFAULT_GREEDY_RESTARTS, DEFAULT_MAX_INTERVALS,
};
