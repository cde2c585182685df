use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DyadicInterval, DyadicRational};
use crate::error::{Error, Result};

/// A finite set of dyadic intervals.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalCollection {
    members: BTreeSet<DyadicInterval>,
}

impl IntervalCollection {
    pub fn new() -> Self {
        Self::default()
    }

    /// All of `D_{≤depth}`.
    pub fn all_up_to(depth: u32) -> Self {
        DyadicInterval::all_up_to(depth).collect()
    }

    pub fn insert(&mut self, interval: DyadicInterval) -> bool {
        self.members.insert(interval)
    }

    pub fn remove(&mut self, interval: &DyadicInterval) -> bool {
        self.members.remove(interval)
    }

    pub fn contains(&self, interval: &DyadicInterval) -> bool {
        self.members.contains(interval)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &DyadicInterval> + '_ {
        self.members.iter()
    }

    pub fn as_set(&self) -> &BTreeSet<DyadicInterval> {
        &self.members
    }

    pub fn max_level(&self) -> Option<u32> {
        self.members.iter().map(|i| i.level()).max()
    }

    pub fn is_subset(&self, other: &IntervalCollection) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Members below or equal to `top`.
    pub fn within(&self, top: &DyadicInterval) -> IntervalCollection {
        self.iter().filter(|j| top.contains(j)).copied().collect()
    }

    /// Members not strictly contained in another member.
    pub fn maximal_members(&self) -> IntervalCollection {
        self.iter()
            .filter(|i| !i.ancestors().any(|a| self.contains(&a)))
            .copied()
            .collect()
    }

    /// The nearest strict ancestor of `interval` that belongs to the collection.
    pub fn nearest_member_above(&self, interval: &DyadicInterval) -> Option<DyadicInterval> {
        interval.ancestors().find(|a| self.contains(a))
    }

    /// `|E*|`, the measure of the union.
    pub fn cover_measure(&self) -> DyadicRational {
        self.maximal_members().iter().map(|i| i.measure()).sum()
    }

    /// `G₁(I, E)`: maximal members strictly inside `top`.
    pub fn g1(&self, top: &DyadicInterval) -> IntervalCollection {
        self.iter()
            .filter(|j| top.strictly_contains(j))
            .filter(|j| {
                (top.level() + 1..j.level()).all(|l| !self.contains(&j.ancestor_at(l).unwrap()))
            })
            .copied()
            .collect()
    }

    /// `G_n(K | E)`, the n-th generation underneath `top`. `n = 0` yields `{top}`.
    pub fn gn(&self, top: &DyadicInterval, n: u32) -> IntervalCollection {
        let mut generation: IntervalCollection = std::iter::once(*top).collect();
        for _ in 0..n {
            let mut next = IntervalCollection::new();
            for j in generation.iter() {
                next.members.extend(self.g1(j).members);
            }
            generation = next;
            if generation.is_empty() {
                break;
            }
        }
        generation
    }

    /// `(1/|I|) Σ_{J ∈ E, J ⊆ I} |J|` for a fixed `I` (which need not be a member).
    pub fn local_packing(&self, top: &DyadicInterval) -> DyadicRational {
        let total: DyadicRational = self
            .iter()
            .filter(|j| top.contains(j))
            .map(|j| j.measure())
            .sum();
        total.scale_pow2(top.level() as i32)
    }

    /// The Carleson constant `⟦C⟧ = sup_{I∈C} (1/|I|) Σ_{J∈C, J⊆I} |J|`.
    pub fn carleson_constant(&self) -> Result<DyadicRational> {
        if self.is_empty() {
            return Err(Error::domain("Carleson constant of an empty collection"));
        }
        // push each member's measure to all of its member ancestors
        let mut packed: std::collections::BTreeMap<DyadicInterval, DyadicRational> =
            self.iter().map(|i| (*i, i.measure())).collect();
        for j in self.iter() {
            for a in j.ancestors() {
                if let Some(v) = packed.get_mut(&a) {
                    *v += j.measure();
                }
            }
        }
        Ok(packed
            .iter()
            .map(|(i, total)| total.scale_pow2(i.level() as i32))
            .max()
            .expect("nonempty"))
    }

    /// Whether `self` is a block in `ambient`: a unique maximal interval `I`,
    /// and order-convex (`J ∈ B, K ∈ L, J ⊆ K ⊆ I ⇒ K ∈ B`).
    pub fn is_block(&self, ambient: &IntervalCollection) -> Result<bool> {
        if let Some(stray) = self.iter().find(|j| !ambient.contains(j)) {
            return Err(Error::domain(format!(
                "block candidate member {stray} is not in the ambient collection"
            )));
        }
        let tops = self.maximal_members();
        if tops.len() != 1 {
            return Ok(false);
        }
        let top = *tops.iter().next().unwrap();
        for j in self.iter() {
            for k in j.ancestors().take_while(|k| top.strictly_contains(k)) {
                if ambient.contains(&k) && !self.contains(&k) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The member `K` maximizing `|G_n(K | C)*| / |K|`, with that score.
    /// Ties go to the smallest level, then the smallest position.
    pub fn condensation_score(&self, n: u32) -> Result<(DyadicInterval, DyadicRational)> {
        if self.is_empty() {
            return Err(Error::domain("condensation score of an empty collection"));
        }
        if n == 0 {
            return Err(Error::domain("generation index must be positive"));
        }
        let mut best: Option<(DyadicInterval, DyadicRational)> = None;
        for k in self.iter() {
            let score = self.gn(k, n).cover_measure().scale_pow2(k.level() as i32);
            if best.as_ref().map_or(true, |(_, b)| score > *b) {
                best = Some((*k, score));
            }
        }
        Ok(best.unwrap())
    }

    /// Image under a map defined on all members.
    pub fn map<F>(&self, mut f: F) -> Result<IntervalCollection>
    where
        F: FnMut(&DyadicInterval) -> Result<DyadicInterval>,
    {
        self.iter().map(|i| f(i)).collect()
    }
}

impl FromIterator<DyadicInterval> for IntervalCollection {
    fn from_iter<T: IntoIterator<Item = DyadicInterval>>(iter: T) -> Self {
        Self {
            members: iter.into_iter().collect(),
        }
    }
}

impl Extend<DyadicInterval> for IntervalCollection {
    fn extend<T: IntoIterator<Item = DyadicInterval>>(&mut self, iter: T) {
        self.members.extend(iter)
    }
}

impl<'a> IntoIterator for &'a IntervalCollection {
    type Item = &'a DyadicInterval;
    type IntoIter = std::collections::btree_set::Iter<'a, DyadicInterval>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

impl fmt::Display for IntervalCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for IntervalCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for IntervalCollection {
    type Err = Error;

    /// Comma or whitespace separated `n:k` items, optionally wrapped in braces.
    /// Duplicates are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut out = IntervalCollection::new();
        for tok in body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let i: DyadicInterval = tok.parse()?;
            if !out.insert(i) {
                return Err(Error::domain(format!("duplicate interval {i}")));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::iv;
    use proptest::prelude::*;

    fn coll(items: &[(u32, u64)]) -> IntervalCollection {
        items.iter().map(|&(l, p)| iv(l, p)).collect()
    }

    fn d(n: i128, e: u32) -> DyadicRational {
        DyadicRational::new(n, e)
    }

    #[test]
    fn cover_measure_examples() {
        assert_eq!(coll(&[(1, 0), (2, 0)]).cover_measure(), d(1, 1));
        assert_eq!(coll(&[(2, 0), (2, 2)]).cover_measure(), d(1, 1));
        assert_eq!(
            IntervalCollection::all_up_to(2).cover_measure(),
            DyadicRational::ONE
        );
        assert_eq!(
            IntervalCollection::new().cover_measure(),
            DyadicRational::ZERO
        );
    }

    #[test]
    fn g1_examples() {
        let d2 = IntervalCollection::all_up_to(2);
        assert_eq!(d2.g1(&iv(0, 0)), coll(&[(1, 0), (1, 1)]));
        assert_eq!(
            coll(&[(0, 0), (2, 0), (2, 1)]).g1(&iv(0, 0)),
            coll(&[(2, 0), (2, 1)])
        );
        assert!(d2.g1(&iv(2, 0)).is_empty());
    }

    #[test]
    fn gn_examples() {
        let d2 = IntervalCollection::all_up_to(2);
        assert_eq!(d2.gn(&iv(0, 0), 2), coll(&[(2, 0), (2, 1), (2, 2), (2, 3)]));
        assert!(coll(&[(0, 0)]).gn(&iv(0, 0), 1).is_empty());
    }

    #[test]
    fn carleson_constant_examples() {
        assert_eq!(
            coll(&[(0, 0)]).carleson_constant().unwrap(),
            DyadicRational::ONE
        );
        assert_eq!(
            coll(&[(0, 0), (1, 0), (2, 0)]).carleson_constant().unwrap(),
            d(7, 2)
        );
        assert_eq!(
            IntervalCollection::all_up_to(2)
                .carleson_constant()
                .unwrap(),
            DyadicRational::from_int(3)
        );
        assert!(matches!(
            IntervalCollection::new().carleson_constant(),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn block_examples() {
        let d2 = IntervalCollection::all_up_to(2);
        assert!(coll(&[(0, 0), (1, 0)]).is_block(&d2).unwrap());
        assert!(!coll(&[(0, 0), (2, 0)]).is_block(&d2).unwrap());
        assert!(coll(&[(2, 3)]).is_block(&d2).unwrap());
        assert!(!coll(&[(1, 0), (1, 1)]).is_block(&d2).unwrap());
        assert!(coll(&[(3, 0)]).is_block(&d2).is_err());
        // convexity is relative to the ambient collection
        let sparse = coll(&[(0, 0), (2, 0)]);
        assert!(sparse.is_block(&sparse).unwrap());
    }

    #[test]
    fn condensation_examples() {
        let d2 = IntervalCollection::all_up_to(2);
        assert_eq!(
            d2.condensation_score(1).unwrap(),
            (iv(0, 0), DyadicRational::ONE)
        );
        assert_eq!(
            coll(&[(0, 0)]).condensation_score(1).unwrap(),
            (iv(0, 0), DyadicRational::ZERO)
        );
        assert_eq!(
            coll(&[(0, 0), (2, 0)]).condensation_score(1).unwrap(),
            (iv(0, 0), d(1, 2))
        );
        assert!(IntervalCollection::new().condensation_score(1).is_err());
    }

    #[test]
    fn text_form() {
        let c: IntervalCollection = "{0:0, 1:1,2:3}".parse().unwrap();
        assert_eq!(c, coll(&[(0, 0), (1, 1), (2, 3)]));
        assert_eq!(c.to_string(), "{0:0,1:1,2:3}");
        assert!("0:0,0:0".parse::<IntervalCollection>().is_err());
    }

    fn arb_collection(depth: u32) -> impl Strategy<Value = IntervalCollection> {
        let all: Vec<_> = DyadicInterval::all_up_to(depth).collect();
        proptest::sample::subsequence(all.clone(), 1..all.len().min(40))
            .prop_map(|v| v.into_iter().collect())
    }

    /// Brute-force union measure on the level-`depth` grid.
    fn cover_by_cells(c: &IntervalCollection, depth: u32) -> DyadicRational {
        let mut hit = vec![false; 1 << depth];
        for i in c {
            for cell in i.cell_range(depth) {
                hit[cell] = true;
            }
        }
        DyadicRational::new(hit.iter().filter(|h| **h).count() as i128, depth)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn partition_identity(b in arb_collection(6)) {
            // Σ_{K∈B, K⊆I₀} (|K| − |G₁(K|B)*|) = |I₀|
            for top in b.iter() {
                let total: DyadicRational = b
                    .iter()
                    .filter(|k| top.contains(k))
                    .map(|k| k.measure() - b.g1(k).cover_measure())
                    .sum();
                prop_assert_eq!(total, top.measure());
            }
        }

        #[test]
        fn cover_bounds_and_brute_force(c in arb_collection(6)) {
            let cover = c.cover_measure();
            let biggest = c.iter().map(|i| i.measure()).max().unwrap();
            let total: DyadicRational = c.iter().map(|i| i.measure()).sum();
            prop_assert!(biggest <= cover && cover <= total);
            prop_assert_eq!(cover, cover_by_cells(&c, 6));
        }

        #[test]
        fn carleson_constant_is_the_attained_sup(c in arb_collection(5)) {
            let cc = c.carleson_constant().unwrap();
            let mut attained = false;
            for i in c.iter() {
                let local: DyadicRational = c.iter().filter(|j| i.contains(j)).map(|j| j.measure()).sum::<DyadicRational>()
                    .scale_pow2(i.level() as i32);
                prop_assert!(local <= cc);
                attained |= local == cc;
            }
            prop_assert!(attained);
        }

        #[test]
        fn generations_disjoint_and_inside(c in arb_collection(5), n in 1u32..4) {
            for k in c.iter() {
                let g = c.gn(k, n);
                for a in g.iter() {
                    prop_assert!(k.strictly_contains(a));
                    for b in g.iter() {
                        prop_assert!(a == b || a.is_disjoint(b));
                    }
                }
                if n == 1 {
                    prop_assert_eq!(&g, &c.g1(k));
                }
            }
        }

        #[test]
        fn g1_is_maximal(c in arb_collection(5)) {
            for top in c.iter() {
                let g = c.g1(top);
                for j in c.iter().filter(|j| top.strictly_contains(j)) {
                    // every member strictly below top lies under exactly one G₁ member
                    prop_assert_eq!(g.iter().filter(|m| m.contains(j)).count(), 1);
                }
            }
        }
    }
}
