//! Exact combinatorics of dyadic intervals in `[0,1)`.

mod collection;
mod interval;
mod rational;

pub use collection::IntervalCollection;
pub use interval::{iv, DyadicInterval, MAX_LEVEL};
pub use rational::{
    fraction_string, fraction_to_f64, serialize_fraction, DyadicRational, Fraction,
};
