use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, IntervalCollection};
use crate::error::{Error, Result};

/// A finite injective map `τ` on dyadic intervals together with its inverse
/// `σ = τ^{-1}`, defined on `τ(D)` only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rearrangement {
    depth: u32,
    forward: BTreeMap<DyadicInterval, DyadicInterval>,
    #[serde(skip)]
    inverse: BTreeMap<DyadicInterval, DyadicInterval>,
}

impl Rearrangement {
    /// Builds `τ` from `(I, τ(I))` pairs; all intervals must lie in `D_{≤depth}`.
    pub fn new<I>(depth: u32, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DyadicInterval, DyadicInterval)>,
    {
        let mut forward = BTreeMap::new();
        let mut inverse = BTreeMap::new();
        for (from, to) in pairs {
            for i in [from, to] {
                if i.level() > depth {
                    return Err(Error::domain(format!("{i} is deeper than depth {depth}")));
                }
            }
            if let Some(prev) = forward.insert(from, to) {
                return Err(Error::domain(format!(
                    "{from} is mapped twice (to {prev} and {to})"
                )));
            }
            if let Some(other) = inverse.insert(to, from) {
                return Err(Error::domain(format!(
                    "not injective: {other} and {from} both map to {to}"
                )));
            }
        }
        Ok(Self {
            depth,
            forward,
            inverse,
        })
    }

    pub fn identity(depth: u32) -> Self {
        Self::new(depth, DyadicInterval::all_up_to(depth).map(|i| (i, i))).unwrap()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn tau(&self, i: &DyadicInterval) -> Option<DyadicInterval> {
        self.forward.get(i).copied()
    }

    pub fn sigma(&self, j: &DyadicInterval) -> Option<DyadicInterval> {
        self.inverse.get(j).copied()
    }

    pub fn tau_checked(&self, i: &DyadicInterval) -> Result<DyadicInterval> {
        self.tau(i)
            .ok_or_else(|| Error::domain(format!("{i} is outside the domain of τ")))
    }

    pub fn sigma_checked(&self, j: &DyadicInterval) -> Result<DyadicInterval> {
        self.sigma(j)
            .ok_or_else(|| Error::domain(format!("{j} is not in τ(D)")))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&DyadicInterval, &DyadicInterval)> + '_ {
        self.forward.iter()
    }

    pub fn domain(&self) -> IntervalCollection {
        self.forward.keys().copied().collect()
    }

    /// `τ(D)`, the domain of `σ`.
    pub fn image(&self) -> IntervalCollection {
        self.inverse.keys().copied().collect()
    }

    /// `σ` as a rearrangement in its own right.
    pub fn inverse(&self) -> Rearrangement {
        Self {
            depth: self.depth,
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `|τ(I)| = |I|` for every `I`.
    pub fn is_measure_preserving(&self) -> bool {
        self.forward.iter().all(|(a, b)| a.level() == b.level())
    }

    /// `level(σ(J)) - level(J)`; `|σ(J)|/|J| = 2^{-shift}`.
    pub(crate) fn sigma_level_shift(&self, j: &DyadicInterval) -> Result<i32> {
        Ok(self.sigma_checked(j)?.level() as i32 - j.level() as i32)
    }

    /// File form: `depth N`, then one `n:k -> n':k'` line per pair.
    pub fn to_text(&self) -> String {
        let mut out = format!("depth {}\n", self.depth);
        for (a, b) in &self.forward {
            let _ = writeln!(out, "{a} -> {b}");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hn, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header `depth N`"))?;
        let depth = header
            .strip_prefix("depth")
            .and_then(|d| d.trim().parse::<u32>().ok())
            .ok_or_else(|| Error::parse(hn, "header must be `depth N`"))?;
        let mut seen_from: BTreeMap<DyadicInterval, usize> = BTreeMap::new();
        let mut seen_to: BTreeMap<DyadicInterval, (usize, DyadicInterval)> = BTreeMap::new();
        let mut pairs = Vec::new();
        for (n, line) in lines {
            let (a, b) = line
                .split_once("->")
                .ok_or_else(|| Error::parse(n, "expected `n:k -> n':k'`"))?;
            let from: DyadicInterval = a
                .parse()
                .map_err(|e: Error| Error::parse(n, e.to_string()))?;
            let to: DyadicInterval = b
                .parse()
                .map_err(|e: Error| Error::parse(n, e.to_string()))?;
            if let Some(prev) = seen_from.insert(from, n) {
                return Err(Error::parse(
                    n,
                    format!("{from} already mapped on line {prev}"),
                ));
            }
            if let Some((prev, other)) = seen_to.insert(to, (n, from)) {
                return Err(Error::parse(
                    n,
                    format!("not injective: {other} (line {prev}) and {from} both map to {to}"),
                ));
            }
            pairs.push((from, to));
        }
        Self::new(depth, pairs).map_err(|e| Error::parse(hn, e.to_string()))
    }
}

impl<'de> Deserialize<'de> for Rearrangement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            depth: u32,
            forward: BTreeMap<DyadicInterval, DyadicInterval>,
        }
        let raw = Raw::deserialize(d)?;
        Rearrangement::new(raw.depth, raw.forward).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::iv;

    #[test]
    fn injectivity_is_enforced() {
        let err = Rearrangement::new(1, [(iv(0, 0), iv(1, 0)), (iv(1, 1), iv(1, 0))]).unwrap_err();
        assert!(err.to_string().contains("1:1"));
        assert!(Rearrangement::new(1, [(iv(2, 0), iv(1, 0))]).is_err());
    }

    #[test]
    fn inverse_is_exact_reversal() {
        let t = Rearrangement::new(
            2,
            [
                (iv(1, 0), iv(2, 0)),
                (iv(2, 0), iv(1, 0)),
                (iv(0, 0), iv(0, 0)),
            ],
        )
        .unwrap();
        assert_eq!(t.sigma(&iv(2, 0)), Some(iv(1, 0)));
        assert_eq!(t.sigma(&iv(2, 1)), None);
        assert_eq!(t.inverse().inverse(), t);
        assert!(!t.is_measure_preserving());
        assert!(Rearrangement::identity(3).is_measure_preserving());
    }

    #[test]
    fn file_form() {
        let text = "depth 2\n1:0 -> 2:0\n# swapped\n2:0 -> 1:0\n";
        let t = Rearrangement::parse_text(text).unwrap();
        assert_eq!(t.tau(&iv(1, 0)), Some(iv(2, 0)));
        assert_eq!(Rearrangement::parse_text(&t.to_text()).unwrap(), t);

        let err = Rearrangement::parse_text("depth 2\n1:0 -> 2:0\n1:1 -> 2:0\n").unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("not injective") && msg.contains("1:0") && msg.contains("1:1"),
            "{msg}"
        );
        assert!(Rearrangement::parse_text("1:0 -> 2:0\n").is_err());
        assert!(Rearrangement::parse_text("depth 1\n1:0 -> 2:0\n").is_err());
    }

    #[test]
    fn json_round_trip_rebuilds_inverse() {
        let t = Rearrangement::new(2, [(iv(1, 0), iv(2, 3)), (iv(2, 3), iv(1, 0))]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: Rearrangement = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.sigma(&iv(2, 3)), Some(iv(1, 0)));
        let bad = r#"{"depth":2,"forward":{"1:0":"2:3","1:1":"2:3"}}"#;
        assert!(serde_json::from_str::<Rearrangement>(bad).is_err());
    }
}
