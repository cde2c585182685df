use std::collections::BTreeMap;

use super::square::square_function;
use super::{HaarVector, RademacherMode};
use crate::dyadic::{DyadicInterval, DyadicRational};
use crate::error::Result;

/// Relative slack on the sup bound in [`is_atom`].
pub const ATOM_SUP_SLACK: f64 = 1e-12;

/// `‖f‖_{H^p_X} = ‖𝕊(f)‖_{L^p}`.
pub fn hp_norm(f: &HaarVector, p: f64, mode: RademacherMode) -> Result<f64> {
    square_function(f, mode)?.lp_norm(p)
}

/// Sum of `weight(J)` over `J ⊆ I`, for every `I` that is a support member or
/// an ancestor of one.
fn local_sums<T, W>(
    support: impl Iterator<Item = (DyadicInterval, T)>,
    weight: W,
) -> BTreeMap<DyadicInterval, T>
where
    T: Copy + std::ops::AddAssign + Default,
    W: Fn(&DyadicInterval, T) -> T,
{
    let mut sums: BTreeMap<DyadicInterval, T> = BTreeMap::new();
    for (j, v) in support {
        let w = weight(&j, v);
        *sums.entry(j).or_default() += w;
        for a in j.ancestors() {
            *sums.entry(a).or_default() += w;
        }
    }
    sums
}

/// `‖f‖_BMO` for a scalar series:
/// `sup_I (1/|I|) Σ_{J⊆I} a_J² |J|`, square-rooted.
pub fn bmo_norm(f: &HaarVector) -> Result<f64> {
    f.require_scalar("the BMO norm")?;
    let sums = local_sums(f.terms().map(|(i, x)| (*i, x[0] * x[0])), |j, a2| {
        a2 * j.length()
    });
    Ok(sums
        .iter()
        .map(|(i, s)| s / i.length())
        .fold(0.0, f64::max)
        .sqrt())
}

/// `‖f‖²_BMO` computed exactly from squared coefficients `a_J²`.
pub fn bmo_norm_squared_exact(
    squares: &BTreeMap<DyadicInterval, DyadicRational>,
) -> DyadicRational {
    let sums = local_sums(squares.iter().map(|(i, a2)| (*i, *a2)), |j, a2| {
        a2 * j.measure()
    });
    sums.iter()
        .map(|(i, s)| s.scale_pow2(i.level() as i32))
        .max()
        .unwrap_or(DyadicRational::ZERO)
}

/// Whether `f` is an `H^p_X` atom for `interval`: `supp 𝕊(f) ⊆ I` and
/// `‖𝕊(f)‖_∞ ≤ |I|^{-1/p}` (exact Rademacher averages).
pub fn is_atom(f: &HaarVector, p: f64, interval: &DyadicInterval) -> Result<bool> {
    if !f.support().iter().all(|j| interval.contains(j)) {
        return Ok(false);
    }
    let sup = square_function(f, RademacherMode::Exact)?.sup();
    let bound = (interval.level() as f64 / p).exp2();
    Ok(sup <= bound * (1.0 + ATOM_SUP_SLACK))
}
