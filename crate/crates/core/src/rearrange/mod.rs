//! Rearrangements `τ`, the operators `T_{τ,p} ⊗ Id_X` and `S_σ`, norm search
//! and generator families.

mod generate;
mod opnorm;
mod ops;
mod tau;

pub use generate::{generate, GeneratorKind};
pub use opnorm::{bmo_opnorm_lower, opnorm_lower, BmoLowerBound, OpNormEstimate, SearchConfig};
pub use ops::{apply_s_sigma, apply_t};
pub use tau::Rearrangement;
