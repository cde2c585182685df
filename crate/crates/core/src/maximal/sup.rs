//! Suprema over subcollections of `τ(D)`: the constant `C₁` and the
//! Carleson-ratio `sup ⟦σ(C)⟧/⟦C⟧`. Both are sups over a finite domain at
//! finite depth, so they are depth-truncated values.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, DyadicRational, Fraction, IntervalCollection};
use crate::error::{Error, Result};
use crate::rearrange::Rearrangement;

pub const DEFAULT_MAX_INTERVALS: usize = 20;
pub const DEFAULT_GREEDY_RESTARTS: usize = 64;
/// Exhaustive enumeration refuses domains beyond this, whatever the cap.
const ENUMERATION_LIMIT: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMode {
    Exact { max_intervals: usize },
    Greedy { seed: u64, restarts: usize },
}

impl SupMode {
    pub fn exact() -> Self {
        SupMode::Exact {
            max_intervals: DEFAULT_MAX_INTERVALS,
        }
    }

    pub fn greedy(seed: u64) -> Self {
        SupMode::Greedy {
            seed,
            restarts: DEFAULT_GREEDY_RESTARTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupResult {
    #[serde(serialize_with = "crate::dyadic::serialize_fraction")]
    pub value: Fraction,
    pub argmax: IntervalCollection,
    /// True when the value is the exact maximum over every nonempty
    /// subcollection.
    pub exhaustive: bool,
    /// Truncation depth of `τ`.
    pub depth: u32,
    pub evaluations: u64,
}

/// Precomputed tree structure of `τ(D)` and `σ(τ(D))`, indexed in interval
/// order so that ancestors precede descendants.
struct Layout {
    items: Vec<DyadicInterval>,
    measure: Vec<DyadicRational>,
    sigma_measure: Vec<DyadicRational>,
    /// `|σ(I)|/|I|`.
    ratio: Vec<DyadicRational>,
    /// Indices of strict ancestors, deepest first.
    anc: Vec<Vec<usize>>,
    /// Indices `k` with `σ(items[k]) ⊋ σ(items[j])`.
    sigma_anc: Vec<Vec<usize>>,
}

impl Layout {
    fn new(tau: &Rearrangement) -> Result<Self> {
        let items: Vec<DyadicInterval> = tau.image().iter().copied().collect();
        let sigmas: Vec<DyadicInterval> = items
            .iter()
            .map(|j| tau.sigma_checked(j))
            .collect::<Result<_>>()?;
        let index: std::collections::BTreeMap<DyadicInterval, usize> =
            items.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        let anc = items
            .iter()
            .map(|j| {
                j.ancestors()
                    .filter_map(|a| index.get(&a).copied())
                    .collect()
            })
            .collect();
        let sigma_anc = sigmas
            .iter()
            .map(|s| {
                (0..sigmas.len())
                    .filter(|k| sigmas[*k].strictly_contains(s))
                    .collect()
            })
            .collect();
        Ok(Self {
            measure: items.iter().map(|i| i.measure()).collect(),
            sigma_measure: sigmas.iter().map(|s| s.measure()).collect(),
            ratio: items
                .iter()
                .zip(&sigmas)
                .map(|(i, s)| DyadicRational::pow2(i.level() as i32 - s.level() as i32))
                .collect(),
            items,
            anc,
            sigma_anc,
        })
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

trait Objective: Sync {
    /// `(numerator, denominator)` with a positive denominator, for a nonempty
    /// selection.
    fn eval(&self, lay: &Layout, sel: &[bool]) -> (DyadicRational, DyadicRational);
}

struct C1;

impl Objective for C1 {
    fn eval(&self, lay: &Layout, sel: &[bool]) -> (DyadicRational, DyadicRational) {
        let mut carried = vec![DyadicRational::ZERO; lay.len()];
        let mut integral = DyadicRational::ZERO;
        let mut cover = DyadicRational::ZERO;
        for j in 0..lay.len() {
            if !sel[j] {
                continue;
            }
            let parent = lay.anc[j].iter().find(|a| sel[**a]).copied();
            let m = match parent {
                Some(a) => {
                    integral = integral - carried[a] * lay.measure[j];
                    carried[a].max(lay.ratio[j])
                }
                None => lay.ratio[j],
            };
            carried[j] = m;
            integral += m * lay.measure[j];
            if !lay.sigma_anc[j].iter().any(|k| sel[*k]) {
                cover += lay.sigma_measure[j];
            }
        }
        (integral, cover)
    }
}

struct CarlesonRatio;

fn packing(
    lay: &Layout,
    sel: &[bool],
    anc: &[Vec<usize>],
    measure: &[DyadicRational],
) -> DyadicRational {
    let mut acc = vec![DyadicRational::ZERO; lay.len()];
    for j in (0..lay.len()).filter(|j| sel[*j]) {
        acc[j] += measure[j];
        for a in anc[j].iter().filter(|a| sel[**a]) {
            acc[*a] += measure[j];
        }
    }
    (0..lay.len())
        .filter(|j| sel[*j])
        .map(|j| acc[j].scale_pow2(measure[j].exponent_level()))
        .max()
        .unwrap_or(DyadicRational::ZERO)
}

impl Objective for CarlesonRatio {
    fn eval(&self, lay: &Layout, sel: &[bool]) -> (DyadicRational, DyadicRational) {
        (
            packing(lay, sel, &lay.sigma_anc, &lay.sigma_measure),
            packing(lay, sel, &lay.anc, &lay.measure),
        )
    }
}

trait PowerOfTwo {
    /// `-log₂` of a power of two.
    fn exponent_level(&self) -> i32;
}

impl PowerOfTwo for DyadicRational {
    fn exponent_level(&self) -> i32 {
        debug_assert_eq!(self.numerator().count_ones(), 1);
        self.exponent() as i32 - self.numerator().trailing_zeros() as i32
    }
}

/// Exact nonnegative values that can be compared as fractions.
trait Exact: Copy + Send {
    /// Compares `an/ad` with `bn/bd`; denominators are positive.
    fn cross_cmp(an: Self, ad: Self, bn: Self, bd: Self) -> Ordering;
    fn fraction(num: Self, den: Self) -> Fraction;
}

impl Exact for DyadicRational {
    fn cross_cmp(an: Self, ad: Self, bn: Self, bd: Self) -> Ordering {
        (an * bd).cmp(&(bn * ad))
    }

    fn fraction(num: Self, den: Self) -> Fraction {
        num.to_fraction() / den.to_fraction()
    }
}

/// A fixed-point value `x · 2^{-scale}`, with the scale shared by every value
/// of one search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Fixed(u128);

fn wide_mul(a: u128, b: u128) -> (u128, u128) {
    let mask = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & mask);
    let (b1, b0) = (b >> 64, b & mask);
    let lo = a0 * b0;
    let mid1 = a1 * b0;
    let mid2 = a0 * b1;
    let (mid, carry) = mid1.overflowing_add(mid2);
    let (lo, c2) = lo.overflowing_add((mid & mask) << 64);
    let hi = a1 * b1 + (mid >> 64) + ((carry as u128) << 64) + c2 as u128;
    (hi, lo)
}

impl Exact for Fixed {
    fn cross_cmp(an: Self, ad: Self, bn: Self, bd: Self) -> Ordering {
        wide_mul(an.0, bd.0).cmp(&wide_mul(bn.0, ad.0))
    }

    fn fraction(num: Self, den: Self) -> Fraction {
        let g = num.0.max(1).trailing_zeros().min(den.0.trailing_zeros());
        Fraction::new((num.0 >> g) as i128, (den.0 >> g) as i128)
    }
}

#[derive(Clone)]
struct Candidate<V> {
    num: V,
    den: V,
    members: Vec<usize>,
}

impl<V: Exact> Candidate<V> {
    /// Larger value first; among equal values the lexicographically smaller
    /// member list wins.
    fn beats(&self, other: &Candidate<V>) -> bool {
        match V::cross_cmp(self.num, self.den, other.num, other.den) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.members < other.members,
        }
    }
}

fn better<V: Exact>(a: Option<Candidate<V>>, b: Option<Candidate<V>>) -> Option<Candidate<V>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, b) => a.or(b),
    }
}

fn finish<V: Exact>(
    lay: &Layout,
    best: Candidate<V>,
    exhaustive: bool,
    depth: u32,
    evaluations: u64,
) -> SupResult {
    SupResult {
        value: V::fraction(best.num, best.den),
        argmax: best.members.iter().map(|k| lay.items[*k]).collect(),
        exhaustive,
        depth,
        evaluations,
    }
}

/// Incremental evaluation of a selection that grows and shrinks at its end.
trait Walker: Clone + Send {
    type V: Exact;
    fn len(&self) -> usize;
    fn push(&mut self, j: usize);
    fn pop(&mut self, j: usize);
    /// `(numerator, denominator)` of the current nonempty selection.
    fn value(&mut self) -> (Self::V, Self::V);
    /// Numerator of the selection extended by every index `≥ from`.
    fn reach(&mut self, from: usize) -> Self::V;
}

struct Plain<'a, O> {
    obj: &'a O,
    lay: &'a Layout,
    sel: Vec<bool>,
}

impl<O> Clone for Plain<'_, O> {
    fn clone(&self) -> Self {
        Self {
            obj: self.obj,
            lay: self.lay,
            sel: self.sel.clone(),
        }
    }
}

impl<O: Objective> Walker for Plain<'_, O> {
    type V = DyadicRational;

    fn len(&self) -> usize {
        self.lay.len()
    }

    fn push(&mut self, j: usize) {
        self.sel[j] = true;
    }

    fn pop(&mut self, j: usize) {
        self.sel[j] = false;
    }

    fn value(&mut self) -> (DyadicRational, DyadicRational) {
        self.obj.eval(self.lay, &self.sel)
    }

    fn reach(&mut self, from: usize) -> DyadicRational {
        let saved = self.sel.clone();
        for s in &mut self.sel[from..] {
            *s = true;
        }
        let (reach, _) = self.obj.eval(self.lay, &self.sel);
        self.sel = saved;
        reach
    }
}

/// Exact maximization over all nonempty selections.
///
/// Selections are visited as sorted index lists in lexicographic order. Both
/// parts of the objective are nondecreasing in the selection, so every
/// extension of a list `L` with last index `l` scores at most
/// `num(L ∪ {j > l}) / den(L)`; subtrees that cannot beat the incumbent are
/// skipped. Earlier lists are lexicographically smaller, so keeping the first
/// strict maximum yields the smallest maximizer. Work is split by the first
/// two indices, and results are merged in list order.
fn branch_and_bound<W: Walker + Sync>(walker: &W) -> (Candidate<W::V>, u64) {
    let n = walker.len();
    let mut roots: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        roots.push(vec![i]);
        roots.extend((i + 1..n).map(|j| vec![i, j]));
    }
    let runs: Vec<(Option<Candidate<W::V>>, u64)> = roots
        .par_iter()
        .map(|root| {
            let mut w = walker.clone();
            for k in root {
                w.push(*k);
            }
            let mut list = root.clone();
            let mut best = None;
            let mut evaluations = 0;
            let descend = root.len() == 2;
            search(&mut w, &mut list, &mut best, &mut evaluations, descend);
            (best, evaluations)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.1).sum();
    let best = runs
        .into_iter()
        .map(|r| r.0)
        .fold(None, better)
        .expect("nonempty domain");
    (best, evaluations)
}

fn search<W: Walker>(
    w: &mut W,
    list: &mut Vec<usize>,
    best: &mut Option<Candidate<W::V>>,
    evaluations: &mut u64,
    descend: bool,
) {
    let (num, den) = w.value();
    *evaluations += 1;
    if best.as_ref().map_or(true, |b| {
        W::V::cross_cmp(num, den, b.num, b.den) == Ordering::Greater
    }) {
        *best = Some(Candidate {
            num,
            den,
            members: list.clone(),
        });
    }
    let last = *list.last().expect("nonempty list");
    if !descend || last + 1 == w.len() {
        return;
    }
    let reach = w.reach(last + 1);
    if let Some(b) = best.as_ref() {
        if W::V::cross_cmp(reach, den, b.num, b.den) != Ordering::Greater {
            return;
        }
    }
    for j in last + 1..w.len() {
        list.push(j);
        w.push(j);
        search(w, list, best, evaluations, true);
        w.pop(j);
        list.pop();
    }
}

fn local_search<O: Objective>(
    obj: &O,
    lay: &Layout,
    seed: u64,
    restarts: usize,
) -> (Candidate<DyadicRational>, u64) {
    let n = lay.len();
    let runs: Vec<(Candidate<DyadicRational>, u64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut sel: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            if !sel.iter().any(|s| *s) {
                sel[rng.gen_range(0..n)] = true;
            }
            let (mut num, mut den) = obj.eval(lay, &sel);
            let mut evaluations = 1u64;
            let mut order: Vec<usize> = (0..n).collect();
            loop {
                order.shuffle(&mut rng);
                let mut improved = false;
                for &k in &order {
                    sel[k] = !sel[k];
                    if sel.iter().any(|s| *s) {
                        let (a, b) = obj.eval(lay, &sel);
                        evaluations += 1;
                        if a * den > num * b {
                            num = a;
                            den = b;
                            improved = true;
                            continue;
                        }
                    }
                    sel[k] = !sel[k];
                }
                if !improved {
                    break;
                }
            }
            let members = (0..n).filter(|k| sel[*k]).collect();
            (Candidate { num, den, members }, evaluations)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.1).sum();
    let best = runs
        .into_iter()
        .map(|r| Some(r.0))
        .fold(None, better)
        .expect("restarts > 0");
    (best, evaluations)
}

fn sup<O: Objective>(obj: &O, tau: &Rearrangement, mode: SupMode, fast: bool) -> Result<SupResult> {
    let lay = Layout::new(tau)?;
    if lay.len() == 0 {
        return Err(Error::domain("τ has an empty domain"));
    }
    match mode {
        SupMode::Exact { max_intervals } => {
            let cap = max_intervals.min(ENUMERATION_LIMIT);
            if lay.len() > cap {
                return Err(Error::Capacity {
                    what: "τ(D) for exhaustive enumeration",
                    size: lay.len(),
                    cap,
                });
            }
            if fast {
                if let Some(walker) = FixedC1::new(&lay, tau) {
                    let (best, evaluations) = branch_and_bound(&walker);
                    return Ok(finish(&lay, best, true, tau.depth(), evaluations));
                }
            }
            let walker = Plain {
                obj,
                lay: &lay,
                sel: vec![false; lay.len()],
            };
            let (best, evaluations) = branch_and_bound(&walker);
            Ok(finish(&lay, best, true, tau.depth(), evaluations))
        }
        SupMode::Greedy { seed, restarts } => {
            if restarts == 0 {
                return Err(Error::domain("at least one restart is required"));
            }
            let (best, evaluations) = local_search(obj, &lay, seed, restarts);
            Ok(finish(&lay, best, false, tau.depth(), evaluations))
        }
    }
}

/// `C₁ = sup_{H⊆τ(D)} (1/|σ(H)*|) ∫ μ_H`.
pub fn c1(tau: &Rearrangement, mode: SupMode) -> Result<SupResult> {
    sup(&C1, tau, mode, true)
}

/// `sup_{C⊆τ(D)} ⟦σ(C)⟧/⟦C⟧`.
pub fn carleson_ratio_sup(tau: &Rearrangement, mode: SupMode) -> Result<SupResult> {
    sup(&CarlesonRatio, tau, mode, false)
}

/// `C₁` walker in fixed point over the pieces of `[0,1)` on which the set of
/// containing intervals is constant.
#[derive(Clone)]
struct FixedC1 {
    n: usize,
    /// Level of each piece.
    piece_level: Vec<u32>,
    /// Pieces inside each interval.
    pieces_of: Vec<Vec<usize>>,
    /// `log₂(|σ(I)|/|I|)`.
    log_ratio: Vec<i32>,
    sigma_level: Vec<u32>,
    sigma_anc: Vec<Vec<usize>>,
    sigma_desc: Vec<Vec<usize>>,
    /// Largest `log_ratio` over indices `≥ from` containing each piece.
    suffix: Vec<Vec<i32>>,
    scale: i32,
    sel: Vec<bool>,
    mu: Vec<i32>,
    num: u128,
    den: u128,
    undo: Vec<(usize, i32)>,
    frames: Vec<(u128, u128, usize)>,
}

const EMPTY: i32 = i32::MIN;
/// Headroom kept below `2^128` for sums.
const FIXED_BITS: i32 = 112;

impl FixedC1 {
    /// `None` when the exponent range does not fit the fixed-point format.
    fn new(lay: &Layout, tau: &Rearrangement) -> Option<Self> {
        let n = lay.len();
        let mut splits = IntervalCollection::new();
        for i in &lay.items {
            splits.extend(i.ancestors());
        }
        let mut pieces = Vec::new();
        let mut stack = vec![DyadicInterval::UNIT];
        while let Some(node) = stack.pop() {
            if splits.contains(&node) {
                stack.push(node.right());
                stack.push(node.left());
            } else {
                pieces.push(node);
            }
        }
        let sigmas: Vec<DyadicInterval> = lay
            .items
            .iter()
            .map(|j| tau.sigma(j).expect("image"))
            .collect();
        let log_ratio: Vec<i32> = lay
            .items
            .iter()
            .zip(&sigmas)
            .map(|(i, s)| i.level() as i32 - s.level() as i32)
            .collect();
        let max_piece = pieces.iter().map(|p| p.level() as i32).max().unwrap_or(0);
        let min_piece = pieces.iter().map(|p| p.level() as i32).min().unwrap_or(0);
        let (min_e, max_e) = (*log_ratio.iter().min()?, *log_ratio.iter().max()?);
        let max_sigma = sigmas.iter().map(|s| s.level() as i32).max()?;
        let scale = (max_piece - min_e).max(max_sigma).max(0);
        let spread = scale + max_e - min_piece;
        let count_bits = 64 - ((pieces.len() + n) as u64).leading_zeros() as i32;
        if spread + count_bits > FIXED_BITS {
            return None;
        }
        let pieces_of: Vec<Vec<usize>> = lay
            .items
            .iter()
            .map(|i| {
                (0..pieces.len())
                    .filter(|r| i.contains(&pieces[*r]))
                    .collect()
            })
            .collect();
        let mut suffix = vec![vec![EMPTY; pieces.len()]; n + 1];
        for from in (0..n).rev() {
            suffix[from] = suffix[from + 1].clone();
            for r in &pieces_of[from] {
                suffix[from][*r] = suffix[from][*r].max(log_ratio[from]);
            }
        }
        let sigma_desc = (0..n)
            .map(|j| {
                (0..n)
                    .filter(|k| sigmas[j].strictly_contains(&sigmas[*k]))
                    .collect()
            })
            .collect();
        Some(Self {
            n,
            piece_level: pieces.iter().map(|p| p.level()).collect(),
            pieces_of,
            log_ratio,
            sigma_level: sigmas.iter().map(|s| s.level()).collect(),
            sigma_anc: lay.sigma_anc.clone(),
            sigma_desc,
            suffix,
            scale,
            sel: vec![false; n],
            mu: vec![EMPTY; pieces.len()],
            num: 0,
            den: 0,
            undo: Vec::new(),
            frames: Vec::new(),
        })
    }

    fn term(&self, e: i32, r: usize) -> u128 {
        if e == EMPTY {
            0
        } else {
            1u128 << (self.scale + e - self.piece_level[r] as i32)
        }
    }

    fn cover_term(&self, j: usize) -> u128 {
        1u128 << (self.scale - self.sigma_level[j] as i32)
    }
}

impl Walker for FixedC1 {
    type V = Fixed;

    fn len(&self) -> usize {
        self.n
    }

    fn push(&mut self, j: usize) {
        self.frames.push((self.num, self.den, self.undo.len()));
        let e = self.log_ratio[j];
        for k in 0..self.pieces_of[j].len() {
            let r = self.pieces_of[j][k];
            let old = self.mu[r];
            if e > old {
                self.num = self.num - self.term(old, r) + self.term(e, r);
                self.undo.push((r, old));
                self.mu[r] = e;
            }
        }
        if !self.sigma_anc[j].iter().any(|a| self.sel[*a]) {
            self.den += self.cover_term(j);
            for &k in &self.sigma_desc[j] {
                if self.sel[k] && !self.sigma_anc[k].iter().any(|a| self.sel[*a]) {
                    self.den -= self.cover_term(k);
                }
            }
        }
        self.sel[j] = true;
    }

    fn pop(&mut self, j: usize) {
        self.sel[j] = false;
        let (num, den, len) = self.frames.pop().expect("balanced push and pop");
        while self.undo.len() > len {
            let (r, old) = self.undo.pop().unwrap();
            self.mu[r] = old;
        }
        self.num = num;
        self.den = den;
    }

    fn value(&mut self) -> (Fixed, Fixed) {
        (Fixed(self.num), Fixed(self.den))
    }

    fn reach(&mut self, from: usize) -> Fixed {
        Fixed(
            (0..self.mu.len())
                .map(|r| self.term(self.mu[r].max(self.suffix[from][r]), r))
                .sum(),
        )
    }
}
