//! Fixed inputs for the timed kernels.

use haarlab_core::{iv, DyadicInterval, HaarVector, NormedSpace, Rearrangement};

/// A scalar series with every interval of `D_{≤8}` in its support.
pub fn full_depth8_scalar() -> HaarVector {
    HaarVector::scalar(
        8,
        DyadicInterval::all_up_to(8)
            .enumerate()
            .map(|(k, i)| (i, ((k as f64) * 0.731).sin() + 0.05)),
    )
    .expect("valid series")
}

/// An `ℓ¹₂` series on the 16-chain `[0, 2^{-k})`, the worst case for exact
/// Rademacher averages at support 16.
pub fn chain16_l1() -> HaarVector {
    HaarVector::from_terms(
        NormedSpace::lr(1.0, 2).expect("valid space"),
        15,
        (0..16).map(|k| (iv(k, 0), vec![1.0 + k as f64 * 0.1, -0.5 + (k % 3) as f64])),
    )
    .expect("valid series")
}

/// A rearrangement of `D_{≤3}` (15 intervals) reversing positions within
/// each level.
pub fn reversal15() -> Rearrangement {
    Rearrangement::new(
        3,
        DyadicInterval::all_up_to(3).map(|i| (i, iv(i.level(), (1u64 << i.level()) - 1 - i.pos()))),
    )
    .expect("valid rearrangement")
}
