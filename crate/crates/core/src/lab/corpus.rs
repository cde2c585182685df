//! Seeded random inputs. Every generator draws from the caller's RNG only.

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{DyadicInterval, IntervalCollection};
use crate::error::Result;
use crate::haar::{square_function, HaarVector, NormedSpace, RademacherMode};
use crate::rearrange::{generate, GeneratorKind, Rearrangement};

pub fn case_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rearrangement of `D_{≤depth}` from a randomly chosen family.
pub fn random_tau(rng: &mut ChaCha8Rng, depth: u32) -> Result<Rearrangement> {
    let kind = *GeneratorKind::ALL.choose(rng).expect("nonempty");
    generate(kind, depth, rng.gen())
}

/// A nonempty random subcollection.
pub fn random_subset(
    rng: &mut ChaCha8Rng,
    from: &IntervalCollection,
    density: f64,
) -> IntervalCollection {
    let mut out: IntervalCollection = from
        .iter()
        .filter(|_| rng.gen_bool(density))
        .copied()
        .collect();
    if out.is_empty() {
        if let Some(i) = from.iter().choose(rng) {
            out.insert(*i);
        }
    }
    out
}

fn random_coeff(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
        if x.iter().any(|v| *v != 0.0) {
            return x;
        }
    }
}

/// A nonzero series with between 1 and `max_support` terms in `D_{≤depth}`.
pub fn random_series(
    rng: &mut ChaCha8Rng,
    space: NormedSpace,
    depth: u32,
    max_support: usize,
) -> Result<HaarVector> {
    let all: Vec<DyadicInterval> = DyadicInterval::all_up_to(depth).collect();
    let k = rng.gen_range(1..=max_support.min(all.len()).max(1));
    let support: Vec<DyadicInterval> = all.choose_multiple(rng, k).copied().collect();
    let terms: Vec<(DyadicInterval, Vec<f64>)> = support
        .into_iter()
        .map(|i| (i, random_coeff(rng, space.dim())))
        .collect();
    HaarVector::from_terms(space, depth, terms)
}

/// An atom for `p` together with a rearrangement whose domain holds at most
/// `max_domain` intervals and contains the atom's support.
#[derive(Clone, Debug)]
pub struct AtomCase {
    pub tau: Rearrangement,
    pub f: HaarVector,
    pub interval: DyadicInterval,
}

pub fn random_atom_case(
    rng: &mut ChaCha8Rng,
    space: NormedSpace,
    p: f64,
    depth: u32,
    max_domain: usize,
) -> Result<AtomCase> {
    let level = rng.gen_range(0..=depth.saturating_sub(1).min(3));
    let top = DyadicInterval::new(level, rng.gen_range(0..1u64 << level))?;
    let below: Vec<DyadicInterval> = DyadicInterval::all_up_to(depth)
        .filter(|j| top.strictly_contains(j))
        .collect();
    let inside_count = rng.gen_range(0..=below.len().min(max_domain.saturating_sub(4).max(1)));
    let mut inside: Vec<DyadicInterval> =
        below.choose_multiple(rng, inside_count).copied().collect();
    inside.push(top);
    let outside_pool: Vec<DyadicInterval> = DyadicInterval::all_up_to(depth)
        .filter(|j| !top.contains(j))
        .collect();
    let outside_count = rng
        .gen_range(0..=3usize)
        .min(max_domain - inside.len().min(max_domain))
        .min(outside_pool.len());
    let mut domain = inside.clone();
    domain.extend(outside_pool.choose_multiple(rng, outside_count).copied());
    let mut images: Vec<DyadicInterval> = DyadicInterval::all_up_to(depth).collect();
    images.shuffle(rng);
    let tau = Rearrangement::new(depth, domain.iter().copied().zip(images))?;

    let support: Vec<DyadicInterval> = inside
        .iter()
        .filter(|j| **j == top || rng.gen_bool(0.6))
        .copied()
        .collect();
    let raw = HaarVector::from_terms(
        space,
        depth,
        support
            .into_iter()
            .map(|i| (i, random_coeff(rng, space.dim())))
            .collect::<Vec<_>>(),
    )?;
    let sup = square_function(&raw, RademacherMode::Exact)?.sup();
    let target = rng.gen_range(0.25..=1.0) * (top.level() as f64 / p).exp2();
    Ok(AtomCase {
        tau,
        f: raw.scaled(target / sup),
        interval: top,
    })
}
