use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::space::parse_exponent;
use super::NormedSpace;
use crate::dyadic::{DyadicInterval, IntervalCollection};
use crate::error::{Error, Result};

/// A finitely supported Haar series `f = Σ x_I h_I` with `x_I ∈ ℓ^r_m`.
///
/// Coefficients are stored in the `L^∞` normalization of the Haar system;
/// zero vectors are never stored, so the key set is the Haar support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarVector {
    space: NormedSpace,
    depth: u32,
    coeffs: BTreeMap<DyadicInterval, Vec<f64>>,
}

impl HaarVector {
    pub fn zero(space: NormedSpace, depth: u32) -> Self {
        Self {
            space,
            depth,
            coeffs: BTreeMap::new(),
        }
    }

    /// Scalar series from `(interval, coefficient)` pairs.
    pub fn scalar<I>(depth: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DyadicInterval, f64)>,
    {
        let mut f = Self::zero(NormedSpace::scalar(), depth);
        for (i, a) in terms {
            f.set(i, vec![a])?;
        }
        Ok(f)
    }

    pub fn from_terms<I>(space: NormedSpace, depth: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DyadicInterval, Vec<f64>)>,
    {
        let mut f = Self::zero(space, depth);
        for (i, x) in terms {
            f.set(i, x)?;
        }
        Ok(f)
    }

    /// Set the coefficient of `h_I`; a zero vector removes the term.
    pub fn set(&mut self, interval: DyadicInterval, x: Vec<f64>) -> Result<()> {
        if x.len() != self.space.dim() {
            return Err(Error::domain(format!(
                "coefficient of {interval} has dimension {}, space has {}",
                x.len(),
                self.space.dim()
            )));
        }
        if interval.level() > self.depth {
            return Err(Error::domain(format!(
                "{interval} is deeper than the depth bound {}",
                self.depth
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite coefficient at {interval}"
            )));
        }
        if x.iter().all(|v| *v == 0.0) {
            self.coeffs.remove(&interval);
        } else {
            self.coeffs.insert(interval, x);
        }
        Ok(())
    }

    pub fn space(&self) -> NormedSpace {
        self.space
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn with_depth(mut self, depth: u32) -> Result<Self> {
        if self.max_level().map_or(false, |l| l > depth) {
            return Err(Error::domain("support deeper than requested depth"));
        }
        self.depth = depth;
        Ok(self)
    }

    pub fn get(&self, interval: &DyadicInterval) -> Option<&[f64]> {
        self.coeffs.get(interval).map(|v| v.as_slice())
    }

    /// Scalar coefficient, 0 off the support. Panics on vector-valued input.
    pub fn scalar_coeff(&self, interval: &DyadicInterval) -> f64 {
        assert!(self.space.is_scalar());
        self.coeffs.get(interval).map_or(0.0, |v| v[0])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DyadicInterval, &Vec<f64>)> + '_ {
        self.coeffs.iter()
    }

    pub fn support(&self) -> IntervalCollection {
        self.coeffs.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_level(&self) -> Option<u32> {
        self.coeffs.keys().map(|i| i.level()).max()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::zero(self.space, self.depth);
        if c != 0.0 {
            for (i, x) in &self.coeffs {
                out.coeffs.insert(*i, x.iter().map(|v| v * c).collect());
            }
        }
        out
    }

    /// The restriction to the intervals in `keep`.
    pub fn restricted(&self, keep: &IntervalCollection) -> Self {
        Self {
            space: self.space,
            depth: self.depth,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(i, _)| keep.contains(i))
                .map(|(i, x)| (*i, x.clone()))
                .collect(),
        }
    }

    pub(crate) fn require_scalar(&self, what: &str) -> Result<()> {
        if self.space.is_scalar() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} needs a scalar Haar vector, got dimension {}",
                self.space.dim()
            )))
        }
    }

    /// The text file form: a header `space r m depth`, then one
    /// `n:k v1 ... vm` line per coefficient.
    pub fn to_text(&self) -> String {
        let r = match self.space.exponent() {
            super::space::Exponent::Infinity => "inf".to_string(),
            super::space::Exponent::Finite(r) => format!("{r}"),
        };
        let mut out = format!("space {r} {} {}\n", self.space.dim(), self.depth);
        for (i, x) in &self.coeffs {
            let _ = write!(out, "{i}");
            for v in x {
                // `{:?}` prints the shortest representation that round-trips
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
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
            .ok_or_else(|| Error::parse(1, "missing header line `space r m depth`"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "space" {
            return Err(Error::parse(hn, "header must be `space r m depth`"));
        }
        let exponent = parse_exponent(fields[1]).map_err(|e| Error::parse(hn, e.to_string()))?;
        let dim = fields[2]
            .parse::<usize>()
            .map_err(|_| Error::parse(hn, "bad dimension"))?;
        let depth = fields[3]
            .parse::<u32>()
            .map_err(|_| Error::parse(hn, "bad depth"))?;
        let space = NormedSpace::new(dim, exponent).map_err(|e| Error::parse(hn, e.to_string()))?;
        let mut f = Self::zero(space, depth);
        for (n, line) in lines {
            let mut parts = line.split_whitespace();
            let interval: DyadicInterval = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|e: Error| Error::parse(n, e.to_string()))?;
            if f.coeffs.contains_key(&interval) {
                return Err(Error::parse(n, format!("duplicate interval {interval}")));
            }
            let x = parts
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(n, "bad coefficient"))?;
            f.set(interval, x)
                .map_err(|e| Error::parse(n, e.to_string()))?;
        }
        Ok(f)
    }
}
