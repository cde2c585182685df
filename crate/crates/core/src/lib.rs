//! Dyadic Haar analysis at finite depth.
//!
//! The crate is organized bottom-up:
//!
//! * [`dyadic`]: intervals, collections, generations, Carleson constants, all
//!   in exact dyadic-rational arithmetic.
//! * [`haar`]: Haar expansions with coefficients in `ℓ^r_m`, step functions,
//!   scalar and Rademacher-averaged square functions, `H^p` and BMO norms.
//! * [`rearrange`]: rearrangements `τ`, the operators `T_{τ,p} ⊗ Id` and
//!   `S_σ`, operator-norm search and generator families.
//! * [`maximal`]: the maximal function `μ_H`, its resolving collection, the
//!   constant `C₁` and the Carleson-ratio supremum.
//! * [`atoms`]: stopping-time atomic decomposition and its validator.
//! * [`lab`]: seeded corpora, verification suites, sweeps and reports.

pub mod atoms;
pub mod dyadic;
pub mod error;
pub mod haar;
pub mod lab;
pub mod maximal;
pub mod rearrange;

pub use dyadic::{iv, DyadicInterval, DyadicRational, Fraction, IntervalCollection};
pub use error::{Error, Result};
pub use haar::{HaarVector, NormedSpace, RademacherMode, StepFunction};
pub use rearrange::Rearrangement;
