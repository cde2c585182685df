use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Rearrangement;
use crate::dyadic::{iv, DyadicInterval};
use crate::error::{Error, Result};

/// Families of test rearrangements on `D_{≤depth}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// A permutation of each level `D_n`; measure preserving.
    LevelPerm,
    /// Swaps the subtrees below two intervals of the same level by translation.
    BlockShift,
    /// A uniformly random permutation of all of `D_{≤depth}`.
    RandomInjection,
    /// Swaps the chain `[0, 2^{-k})` and its right-hand neighbours with
    /// disjoint deepest-level intervals, so nested families become disjoint
    /// and vice versa.
    CarlesonDistorter,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::LevelPerm,
        GeneratorKind::BlockShift,
        GeneratorKind::RandomInjection,
        GeneratorKind::CarlesonDistorter,
    ];
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::LevelPerm => "levelperm",
            GeneratorKind::BlockShift => "blockshift",
            GeneratorKind::RandomInjection => "randominjection",
            GeneratorKind::CarlesonDistorter => "carlesondistorter",
        })
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::domain(format!("unknown generator {s:?}")))
    }
}

/// A seeded rearrangement of the given family.
pub fn generate(kind: GeneratorKind, depth: u32, seed: u64) -> Result<Rearrangement> {
    if depth == 0 {
        return Err(Error::domain("generator depth must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(DyadicInterval, DyadicInterval)> = match kind {
        GeneratorKind::LevelPerm => (0..=depth)
            .flat_map(|level| {
                let mut perm: Vec<u64> = (0..1u64 << level).collect();
                perm.shuffle(&mut rng);
                perm.into_iter()
                    .enumerate()
                    .map(move |(k, p)| (iv(level, k as u64), iv(level, p)))
                    .collect::<Vec<_>>()
            })
            .collect(),
        GeneratorKind::BlockShift => {
            let level = rng.gen_range(1..=depth);
            let a = rng.gen_range(0..1u64 << level);
            let b = (a + rng.gen_range(1..1u64 << level)) % (1u64 << level);
            DyadicInterval::all_up_to(depth)
                .map(|j| (j, translate(j, level, a, b)))
                .collect()
        }
        GeneratorKind::RandomInjection => {
            let all: Vec<DyadicInterval> = DyadicInterval::all_up_to(depth).collect();
            let mut image = all.clone();
            image.shuffle(&mut rng);
            all.into_iter().zip(image).collect()
        }
        GeneratorKind::CarlesonDistorter => {
            let mut nested: Vec<DyadicInterval> = (0..depth).map(|k| iv(k, 0)).collect();
            nested.extend((1..depth).map(|k| iv(k, 1)));
            let mut deepest: Vec<DyadicInterval> =
                (0..1u64 << depth).map(|k| iv(depth, k)).collect();
            deepest.shuffle(&mut rng);
            let mut map: std::collections::BTreeMap<DyadicInterval, DyadicInterval> =
                DyadicInterval::all_up_to(depth).map(|j| (j, j)).collect();
            for (n, d) in nested.iter().zip(&deepest) {
                map.insert(*n, *d);
                map.insert(*d, *n);
            }
            map.into_iter().collect()
        }
    };
    Rearrangement::new(depth, pairs)
}

/// Moves `j` from below `(level, a)` to below `(level, b)` and back.
fn translate(j: DyadicInterval, level: u32, a: u64, b: u64) -> DyadicInterval {
    if j.level() < level {
        return j;
    }
    let shift = j.level() - level;
    let top = j.pos() >> shift;
    let offset = j.pos() - (top << shift);
    let new_top = if top == a {
        b
    } else if top == b {
        a
    } else {
        top
    };
    iv(j.level(), (new_top << shift) + offset)
}
