use std::collections::BTreeMap;

use serde::Serialize;

use crate::dyadic::{DyadicInterval, DyadicRational, Fraction, IntervalCollection};
use crate::error::{Error, Result};
use crate::haar::{bmo_norm_squared_exact, HaarVector, StepFunction};
use crate::rearrange::Rearrangement;

/// `|σ(I)|/|I|`, a power of two.
pub fn sigma_ratio(tau: &Rearrangement, i: &DyadicInterval) -> Result<DyadicRational> {
    let shift = tau.sigma_level_shift(i)?;
    Ok(DyadicRational::pow2(-shift))
}

fn check_domain(
    h: &IntervalCollection,
    tau: &Rearrangement,
) -> Result<BTreeMap<DyadicInterval, DyadicRational>> {
    h.iter()
        .map(|i| {
            tau.sigma(i)
                .ok_or_else(|| Error::domain(format!("{i} is not in τ(D)")))?;
            Ok((*i, sigma_ratio(tau, i)?))
        })
        .collect()
}

/// Values of `μ_H` on the cells of level `max level(H)` (level 0 when `H` is
/// empty), in exact arithmetic.
pub fn mu_exact(h: &IntervalCollection, tau: &Rearrangement) -> Result<(u32, Vec<DyadicRational>)> {
    let ratios = check_domain(h, tau)?;
    let grid = h.max_level().unwrap_or(0);
    let mut values = vec![DyadicRational::ZERO; 1usize << grid];
    for (i, r) in &ratios {
        for c in i.cell_range(grid) {
            values[c] = values[c].max(*r);
        }
    }
    Ok((grid, values))
}

/// `μ_H(t) = sup_{I∈H} (|σ(I)|/|I|) 1_I(t)`.
pub fn mu(h: &IntervalCollection, tau: &Rearrangement) -> Result<StepFunction> {
    let (grid, values) = mu_exact(h, tau)?;
    StepFunction::new(grid, values.iter().map(|v| v.to_f64()).collect())
}

/// `∫ μ_H` by summing the exact grid values.
pub fn mu_grid_integral(h: &IntervalCollection, tau: &Rearrangement) -> Result<DyadicRational> {
    let (grid, values) = mu_exact(h, tau)?;
    let total: DyadicRational = values.into_iter().sum();
    Ok(total.scale_pow2(-(grid as i32)))
}

/// The resolving collection: for each cell the deepest member of `H` that
/// contains it and attains `μ_H` there.
pub fn resolve(h: &IntervalCollection, tau: &Rearrangement) -> Result<IntervalCollection> {
    let (grid, values) = mu_exact(h, tau)?;
    let ratios = check_domain(h, tau)?;
    let mut out = IntervalCollection::new();
    for (c, v) in values.iter().enumerate() {
        let cell = DyadicInterval::new(grid, c as u64)?;
        let chosen = std::iter::once(cell)
            .chain(cell.ancestors())
            .find(|a| ratios.get(a) == Some(v));
        if let Some(k) = chosen {
            out.insert(k);
        }
    }
    Ok(out)
}

/// `∫ μ_H = Σ_{K∈B} |σ(K)| (|K| − |G₁(K|B)*|)/|K|` with `B = resolve(H, τ)`.
pub fn mu_integral(h: &IntervalCollection, tau: &Rearrangement) -> Result<DyadicRational> {
    let b = resolve(h, tau)?;
    closed_form(&b, tau)
}

fn closed_form(b: &IntervalCollection, tau: &Rearrangement) -> Result<DyadicRational> {
    let mut total = DyadicRational::ZERO;
    for k in b.iter() {
        let free = k.measure() - b.g1(k).cover_measure();
        total += tau.sigma_checked(k)?.measure() * free.scale_pow2(k.level() as i32);
    }
    Ok(total)
}

/// `∫ μ_H` along the tree of `H`: each member `I` carries the largest ratio
/// among its `H`-ancestors and itself on `I \ G₁(I|H)*`.
pub fn mu_integral_by_tree(h: &IntervalCollection, tau: &Rearrangement) -> Result<DyadicRational> {
    let ratios = check_domain(h, tau)?;
    let mut carried: BTreeMap<DyadicInterval, DyadicRational> = BTreeMap::new();
    let mut total = DyadicRational::ZERO;
    // BTreeMap order visits ancestors first
    for (i, r) in &ratios {
        let above = h.nearest_member_above(i).map(|a| carried[&a]);
        let m = above.map_or(*r, |a| a.max(*r));
        carried.insert(*i, m);
        total += m * i.measure();
        if let Some(a) = above {
            total = total - a * i.measure();
        }
    }
    Ok(total)
}

/// Squared coefficients `c_K² = (|K| − |G₁(K|B)*|)/|K|` and the series
/// `Σ_{K∈B} c_K h_K`.
pub fn witness_f(
    b: &IntervalCollection,
    depth: u32,
) -> Result<(BTreeMap<DyadicInterval, DyadicRational>, HaarVector)> {
    if b.is_empty() {
        return Err(Error::domain("witness of an empty collection"));
    }
    let squares: BTreeMap<DyadicInterval, DyadicRational> = b
        .iter()
        .map(|k| {
            (
                *k,
                (k.measure() - b.g1(k).cover_measure()).scale_pow2(k.level() as i32),
            )
        })
        .collect();
    let depth = depth.max(b.max_level().unwrap_or(0));
    let f = HaarVector::scalar(
        depth,
        squares.iter().map(|(k, c2)| (*k, c2.to_f64().sqrt())),
    )?;
    Ok((squares, f))
}

/// `‖S_σ f‖²_BMO` and `‖S_σ f‖²₂` for the witness squares, exactly.
pub fn witness_image_norms(
    squares: &BTreeMap<DyadicInterval, DyadicRational>,
    tau: &Rearrangement,
) -> Result<(DyadicRational, DyadicRational)> {
    let mut image = BTreeMap::new();
    let mut energy = DyadicRational::ZERO;
    for (k, c2) in squares {
        if let Some(s) = tau.sigma(k) {
            image.insert(s, *c2);
            energy += *c2 * s.measure();
        }
    }
    Ok((bmo_norm_squared_exact(&image), energy))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalReport {
    pub h: IntervalCollection,
    pub b: IntervalCollection,
    pub integral: DyadicRational,
    pub sigma_cover: DyadicRational,
    #[serde(serialize_with = "crate::dyadic::serialize_fraction")]
    pub ratio: Fraction,
}

impl MaximalReport {
    pub fn new(h: &IntervalCollection, tau: &Rearrangement) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::domain("H must be nonempty"));
        }
        let b = resolve(h, tau)?;
        let integral = closed_form(&b, tau)?;
        let sigma_cover = h.map(|i| tau.sigma_checked(i))?.cover_measure();
        let ratio = integral.to_fraction() / sigma_cover.to_fraction();
        Ok(Self {
            h: h.clone(),
            b,
            integral,
            sigma_cover,
            ratio,
        })
    }
}
