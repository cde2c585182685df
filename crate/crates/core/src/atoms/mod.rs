//! Stopping-time atomic decomposition.
//!
//! Stopping intervals are chosen top-down. For a stopping interval `I` let
//! `𝕊_I` be the square function of the part of `f` supported inside `I` and
//! `λ = 2^k` the least power of two with `λ² ≥ (4/3) avg_I 𝕊_I²`. The
//! children of `I` are the maximal support intervals `J ⊊ I` whose chain
//! (the terms `K` with `J ⊆ K ⊆ I`) already has square function above `λ`.
//! Their union lies in `{𝕊_I > λ}`, so it covers at most `3/4` of `I`, and
//! summing over generations gives a Carleson constant of at most 4.
//!
//! Scalar series are handled in exact rational arithmetic; vector series use
//! exact Rademacher averages.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::dyadic::{DyadicInterval, DyadicRational, IntervalCollection};
use crate::error::{Error, Result};
use crate::haar::{
    hp_norm, is_atom, rademacher_average, vector_square_function, HaarVector, RademacherMode,
};

/// Relative slack on the block sup bound for vector series.
pub const VECTOR_SUP_SLACK: f64 = 1e-9;
/// Allowed relative error, in units of `f64::EPSILON`, when multiplying an
/// atom back by its scalar.
pub const RECONSTRUCTION_ULPS: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomicDecomposition {
    pub p: f64,
    pub stopping: IntervalCollection,
    pub blocks: BTreeMap<DyadicInterval, IntervalCollection>,
    pub exponents: BTreeMap<DyadicInterval, i32>,
    /// `λ_I = |I|^{1/p} 2^{n(I)}`.
    pub scalars: BTreeMap<DyadicInterval, f64>,
    /// `a_I = f_I / λ_I`.
    pub atoms: BTreeMap<DyadicInterval, HaarVector>,
}

/// A squared square-function value, exact for scalar series.
#[derive(Clone, Debug)]
enum Energy {
    Exact(BigRational),
    Approx(f64),
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

fn pow4(n: i32) -> f64 {
    ((2 * n) as f64).exp2()
}

impl Energy {
    /// `self · num ≤ den · 4^n`, with relative slack for approximate values.
    fn at_most(&self, n: i32, num: u32, den: u32, slack: f64) -> bool {
        match self {
            Energy::Exact(q) => q * exact(num as f64) <= exact(den as f64) * exact(pow4(n)),
            Energy::Approx(v) => v * num as f64 <= den as f64 * pow4(n) * (1.0 + slack),
        }
    }

    /// Least `n` with `self · num ≤ den · 4^n`; `self` must be positive.
    fn least_pow4(&self, num: u32, den: u32) -> i32 {
        let approx = match self {
            Energy::Exact(q) => q.to_f64().unwrap_or(f64::INFINITY),
            Energy::Approx(v) => *v,
        };
        let mut n = ((approx * num as f64 / den as f64).log2() / 2.0).ceil() as i32;
        while !self.at_most(n, num, den, 0.0) {
            n += 1;
        }
        while self.at_most(n - 1, num, den, 0.0) {
            n -= 1;
        }
        n
    }

    fn to_f64(&self) -> f64 {
        match self {
            Energy::Exact(q) => q.to_f64().unwrap_or(f64::INFINITY),
            Energy::Approx(v) => *v,
        }
    }
}

struct Meter<'a> {
    f: &'a HaarVector,
    scalar: bool,
}

impl Meter<'_> {
    /// `𝕊²` of the terms in `chain`, which all contain a common point.
    fn chain(&self, chain: &[DyadicInterval]) -> Result<Energy> {
        if self.scalar {
            Ok(Energy::Exact(
                chain
                    .iter()
                    .map(|k| exact(self.f.scalar_coeff(k)).pow(2))
                    .sum(),
            ))
        } else {
            let vectors: Vec<&[f64]> = chain
                .iter()
                .map(|k| self.f.get(k).expect("support"))
                .collect();
            Ok(Energy::Approx(rademacher_average(
                &vectors,
                &self.f.space(),
                2.0,
            )?))
        }
    }

    /// `avg_I 𝕊(f restricted to terms)²`.
    fn average(&self, top: &DyadicInterval, terms: &IntervalCollection) -> Result<Energy> {
        if self.scalar {
            Ok(Energy::Exact(
                terms
                    .iter()
                    .map(|k| {
                        exact(self.f.scalar_coeff(k)).pow(2)
                            * exact((top.level() as f64 - k.level() as f64).exp2())
                    })
                    .sum(),
            ))
        } else {
            let s = vector_square_function(&self.f.restricted(terms), RademacherMode::Exact)?;
            let integral: f64 = s.values().iter().map(|v| v * v).sum::<f64>() * s.cell_width();
            Ok(Energy::Approx(integral / top.length()))
        }
    }

    /// `sup 𝕊(f restricted to terms)²`.
    fn sup(&self, terms: &IntervalCollection) -> Result<Energy> {
        if self.scalar {
            let mut best = BigRational::zero();
            for k in terms.iter() {
                let chain: Vec<DyadicInterval> = std::iter::once(*k)
                    .chain(k.ancestors().filter(|a| terms.contains(a)))
                    .collect();
                if let Energy::Exact(q) = self.chain(&chain)? {
                    best = best.max(q);
                }
            }
            Ok(Energy::Exact(best))
        } else {
            let s = vector_square_function(&self.f.restricted(terms), RademacherMode::Exact)?;
            Ok(Energy::Approx(s.sup().powi(2)))
        }
    }
}

/// Decomposes `f` into blocks and `H^p_X` atoms.
pub fn atomic_decomposition(f: &HaarVector, p: f64) -> Result<AtomicDecomposition> {
    if f.is_zero() {
        return Err(Error::domain("cannot decompose the zero series"));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!(
            "exponent p must be positive, got {p}"
        )));
    }
    let meter = Meter {
        f,
        scalar: f.space().is_scalar(),
    };
    let support = f.support();
    let mut out = AtomicDecomposition {
        p,
        stopping: IntervalCollection::new(),
        blocks: BTreeMap::new(),
        exponents: BTreeMap::new(),
        scalars: BTreeMap::new(),
        atoms: BTreeMap::new(),
    };
    let mut pending: Vec<DyadicInterval> = support.maximal_members().iter().copied().collect();
    while let Some(top) = pending.pop() {
        let inside = support.within(&top);
        let threshold = meter.average(&top, &inside)?.least_pow4(4, 3);
        let mut stopped = IntervalCollection::new();
        for j in inside.iter().filter(|j| **j != top) {
            if stopped.nearest_member_above(j).is_some() {
                continue;
            }
            let chain: Vec<DyadicInterval> = std::iter::once(*j)
                .chain(
                    j.ancestors()
                        .take_while(|a| top.contains(a))
                        .filter(|a| inside.contains(a)),
                )
                .collect();
            if !meter.chain(&chain)?.at_most(threshold, 1, 1, 0.0) {
                stopped.insert(*j);
            }
        }
        let block: IntervalCollection = inside
            .iter()
            .filter(|k| !stopped.contains(k) && stopped.nearest_member_above(k).is_none())
            .copied()
            .collect();
        let n = meter.sup(&block)?.least_pow4(1, 1);
        let lambda = (n as f64 - top.level() as f64 / p).exp2();
        out.atoms
            .insert(top, f.restricted(&block).scaled(1.0 / lambda));
        out.stopping.insert(top);
        out.blocks.insert(top, block);
        out.exponents.insert(top, n);
        out.scalars.insert(top, lambda);
        pending.extend(stopped.iter().rev().copied());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckFailure {
    /// One of `packing`, `block-sup`, `partition`, `reconstruction`, `atom`.
    pub check: &'static str,
    pub interval: Option<DyadicInterval>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub passed: bool,
    pub failures: Vec<CheckFailure>,
    /// `⟦E⟧`.
    pub carleson: Option<DyadicRational>,
    /// `Σ_I |I| 2^{p n(I)} / ‖f‖^p_{H^p_X}`; reported only.
    pub norm_ratio: f64,
    /// `‖f‖^p / Σ_I ‖f_I‖^p`; reported only.
    pub block_constant: f64,
    pub stopping_count: usize,
}

/// Checks a decomposition of `f` against its defining properties.
pub fn validate_decomposition(
    f: &HaarVector,
    p: f64,
    d: &AtomicDecomposition,
) -> Result<DecompositionReport> {
    let meter = Meter {
        f,
        scalar: f.space().is_scalar(),
    };
    let mut failures = Vec::new();
    let mut fail = |check, interval, detail: String| {
        failures.push(CheckFailure {
            check,
            interval,
            detail,
        })
    };

    let carleson = d.stopping.carleson_constant().ok();
    match carleson {
        Some(c) if c <= DyadicRational::from_int(4) => {}
        Some(c) => fail(
            "packing",
            None,
            format!("Carleson constant of the stopping intervals is {c}"),
        ),
        None => fail("packing", None, "no stopping intervals".into()),
    }

    let support = f.support();
    let mut owner: BTreeMap<DyadicInterval, DyadicInterval> = BTreeMap::new();
    let keys_match = d.blocks.keys().eq(d.stopping.iter())
        && d.exponents.keys().eq(d.stopping.iter())
        && d.scalars.keys().eq(d.stopping.iter())
        && d.atoms.keys().eq(d.stopping.iter());
    if !keys_match {
        fail(
            "partition",
            None,
            "blocks, exponents, scalars and atoms must be keyed by the stopping intervals".into(),
        );
    }
    for (top, block) in &d.blocks {
        match block.is_block(&support) {
            Ok(true) if block.maximal_members().iter().eq([top]) => {}
            Ok(true) => fail(
                "partition",
                Some(*top),
                format!("block {block} is not topped by {top}"),
            ),
            Ok(false) => fail(
                "partition",
                Some(*top),
                format!("block {block} is not order-convex in the support"),
            ),
            Err(e) => fail("partition", Some(*top), e.to_string()),
        }
        for k in block.iter() {
            if let Some(prev) = owner.insert(*k, *top) {
                fail(
                    "partition",
                    Some(*k),
                    format!("{k} lies in the blocks of {prev} and {top}"),
                );
            }
        }
    }
    for k in support.iter().filter(|k| !owner.contains_key(k)) {
        fail("partition", Some(*k), format!("{k} is in no block"));
    }

    let mut mass = 0.0;
    let mut block_norms = 0.0;
    for (top, block) in &d.blocks {
        let (Some(n), Some(lambda), Some(atom)) =
            (d.exponents.get(top), d.scalars.get(top), d.atoms.get(top))
        else {
            continue;
        };
        let piece = f.restricted(block);
        let sup = meter.sup(block)?;
        if !sup.at_most(*n, 1, 1, if meter.scalar { 0.0 } else { VECTOR_SUP_SLACK }) {
            fail(
                "block-sup",
                Some(*top),
                format!(
                    "sup of the block square function is {} > 2^{n}",
                    sup.to_f64().sqrt()
                ),
            );
        }
        let expected = (*n as f64 - top.level() as f64 / p).exp2();
        if *lambda != expected {
            fail(
                "reconstruction",
                Some(*top),
                format!("scalar {lambda} differs from |I|^(1/p) 2^n = {expected}"),
            );
        }
        if atom.support() != *block {
            fail(
                "reconstruction",
                Some(*top),
                "atom support differs from its block".into(),
            );
        }
        for (k, x) in piece.terms() {
            let back = atom.get(k).unwrap_or(&[]);
            let ok = back.len() == x.len()
                && back.iter().zip(x).all(|(a, v)| {
                    (a * lambda - v).abs() <= RECONSTRUCTION_ULPS * f64::EPSILON * v.abs()
                });
            if !ok {
                fail(
                    "reconstruction",
                    Some(*k),
                    format!("λ a differs from the coefficient of {k}"),
                );
            }
        }
        if !is_atom(atom, p, top)? {
            fail(
                "atom",
                Some(*top),
                format!("the piece at {top} is not an atom"),
            );
        }
        mass += top.length() * (p * *n as f64).exp2();
        block_norms += hp_norm(&piece, p, RademacherMode::Exact)?.powf(p);
    }

    let norm_p = hp_norm(f, p, RademacherMode::Exact)?.powf(p);
    Ok(DecompositionReport {
        passed: failures.is_empty(),
        failures,
        carleson,
        norm_ratio: mass / norm_p,
        block_constant: norm_p / block_norms,
        stopping_count: d.stopping.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::iv;
    use crate::haar::NormedSpace;
    use proptest::prelude::*;

    #[test]
    fn single_haar_function() {
        let f = HaarVector::scalar(0, [(iv(0, 0), 1.0)]).unwrap();
        let d = atomic_decomposition(&f, 1.0).unwrap();
        assert_eq!(d.stopping.len(), 1);
        assert_eq!(d.exponents[&iv(0, 0)], 0);
        assert_eq!(d.scalars[&iv(0, 0)], 1.0);
        assert_eq!(d.atoms[&iv(0, 0)], f);
        assert!(validate_decomposition(&f, 1.0, &d).unwrap().passed);
    }

    #[test]
    fn ceiling_rule_for_single_terms() {
        for (c, i) in [
            (3.0, iv(2, 1)),
            (-0.3, iv(0, 0)),
            (4.0, iv(3, 5)),
            (1e-3, iv(1, 1)),
        ] {
            let f = HaarVector::scalar(3, [(i, c)]).unwrap();
            for p in [0.5, 1.0, 2.0] {
                let d = atomic_decomposition(&f, p).unwrap();
                let n = d.exponents[&i];
                let r = (n as f64).exp2();
                assert!(r >= c.abs() && r < 2.0 * c.abs(), "c={c} n={n}");
                let rep = validate_decomposition(&f, p, &d).unwrap();
                assert!(rep.passed, "{:?}", rep.failures);
                assert!(rep.norm_ratio >= 1.0 - 1e-12 && rep.norm_ratio < p.exp2());
            }
        }
    }

    #[test]
    fn two_stopping_intervals() {
        let f = HaarVector::scalar(1, [(iv(0, 0), 1.0), (iv(1, 0), 8.0)]).unwrap();
        let d = atomic_decomposition(&f, 1.0).unwrap();
        assert_eq!(d.stopping, [iv(0, 0), iv(1, 0)].into_iter().collect());
        let rep = validate_decomposition(&f, 1.0, &d).unwrap();
        assert!(rep.passed, "{:?}", rep.failures);
        assert_eq!(rep.carleson, Some(DyadicRational::new(3, 1)));
    }

    #[test]
    fn exponent_too_small_is_reported() {
        let f = HaarVector::scalar(1, [(iv(0, 0), 1.0), (iv(1, 0), 8.0)]).unwrap();
        let mut d = atomic_decomposition(&f, 1.0).unwrap();
        *d.exponents.get_mut(&iv(1, 0)).unwrap() -= 1;
        let rep = validate_decomposition(&f, 1.0, &d).unwrap();
        assert!(!rep.passed);
        assert!(rep
            .failures
            .iter()
            .any(|c| c.check == "block-sup" && c.interval == Some(iv(1, 0))));
    }

    #[test]
    fn broken_partition_is_reported() {
        let f = HaarVector::scalar(2, [(iv(0, 0), 1.0), (iv(2, 3), 1.0)]).unwrap();
        let mut d = atomic_decomposition(&f, 1.0).unwrap();
        let top = *d.stopping.iter().next().unwrap();
        d.blocks.get_mut(&top).unwrap().remove(&iv(2, 3));
        let rep = validate_decomposition(&f, 1.0, &d).unwrap();
        assert!(rep.failures.iter().any(|c| c.check == "partition"));
    }

    #[test]
    fn zero_is_rejected() {
        assert!(atomic_decomposition(&HaarVector::zero(NormedSpace::scalar(), 2), 1.0).is_err());
    }

    #[test]
    fn vector_series() {
        let space = NormedSpace::lr(1.0, 2).unwrap();
        let f = HaarVector::from_terms(
            space,
            3,
            [
                (iv(0, 0), vec![1.0, -1.0]),
                (iv(2, 1), vec![6.0, 2.0]),
                (iv(3, 2), vec![0.5, 9.0]),
            ],
        )
        .unwrap();
        for p in [0.5, 1.0, 1.5] {
            let d = atomic_decomposition(&f, p).unwrap();
            let rep = validate_decomposition(&f, p, &d).unwrap();
            assert!(rep.passed, "{:?}", rep.failures);
        }
    }

    fn arb_scalar() -> impl Strategy<Value = HaarVector> {
        proptest::collection::btree_map(
            (0u32..=5).prop_flat_map(|l| (Just(l), 0..1u64 << l)),
            -64i32..=64,
            1..24,
        )
        .prop_filter_map("nonzero", |m| {
            let f = HaarVector::scalar(
                5,
                m.into_iter().map(|((l, k), c)| (iv(l, k), c as f64 / 8.0)),
            )
            .unwrap();
            (!f.is_zero()).then_some(f)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn decompositions_validate(f in arb_scalar(), p in prop_oneof![Just(0.5), Just(1.0), Just(2.0), 0.3f64..2.0]) {
            let d = atomic_decomposition(&f, p).unwrap();
            let rep = validate_decomposition(&f, p, &d).unwrap();
            prop_assert!(rep.passed, "{:?}", rep.failures);
            prop_assert!(rep.carleson.unwrap() <= DyadicRational::from_int(4));
        }
    }
}
