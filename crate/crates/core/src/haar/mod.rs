//! Haar expansions, square functions and the norms built on them.

mod norms;
mod space;
pub mod square;
mod step;
mod vector;

pub use norms::{bmo_norm, bmo_norm_squared_exact, hp_norm, is_atom, ATOM_SUP_SLACK};
pub use space::{Exponent, NormedSpace};
pub use square::{
    monte_carlo_square_function, rademacher_average, scalar_square_function, square_function,
    square_grid_level, vector_square_function, vector_square_function_with_cap, MonteCarloSquare,
    RademacherMode, EXACT_RADEMACHER_CAP,
};
pub use step::{lp_norm, StepFunction};
pub use vector::HaarVector;
