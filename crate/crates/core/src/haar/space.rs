use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponent of an `ℓ^r` norm, `1 ≤ r ≤ ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

/// `ℓ^r_m`: `m`-dimensional real vectors with the `ℓ^r` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormedSpace {
    dim: usize,
    exponent: Exponent,
}

impl NormedSpace {
    pub fn new(dim: usize, exponent: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("space dimension must be positive"));
        }
        if let Exponent::Finite(r) = exponent {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::domain(format!("ℓ^r exponent must be ≥ 1, got {r}")));
            }
        }
        Ok(Self { dim, exponent })
    }

    pub fn lr(r: f64, dim: usize) -> Result<Self> {
        Self::new(dim, Exponent::Finite(r))
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(dim, Exponent::Infinity)
    }

    /// The real line (`m = 1`).
    pub fn scalar() -> Self {
        Self {
            dim: 1,
            exponent: Exponent::Finite(2.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn is_hilbert(&self) -> bool {
        self.dim == 1 || self.exponent == Exponent::Finite(2.0)
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        if self.dim == 1 {
            return x[0].abs();
        }
        match self.exponent {
            Exponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(r) if r == 1.0 => x.iter().map(|v| v.abs()).sum(),
            Exponent::Finite(r) if r == 2.0 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Exponent::Finite(r) => x.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r),
        }
    }

    /// `‖x‖²`, skipping the square root where the norm is Euclidean.
    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        if self.dim == 1 {
            return x[0] * x[0];
        }
        if self.exponent == Exponent::Finite(2.0) {
            return x.iter().map(|v| v * v).sum();
        }
        let n = self.norm(x);
        n * n
    }
}

impl fmt::Display for NormedSpace {
    /// `r,m` with `inf` for the sup norm.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent {
            Exponent::Infinity => write!(f, "inf,{}", self.dim),
            Exponent::Finite(r) => write!(f, "{},{}", r, self.dim),
        }
    }
}

pub(crate) fn parse_exponent(s: &str) -> Result<Exponent> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s == "∞" {
        return Ok(Exponent::Infinity);
    }
    s.parse::<f64>()
        .map(Exponent::Finite)
        .map_err(|_| Error::domain(format!("bad ℓ^r exponent {s:?}")))
}

impl FromStr for NormedSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, m) = s
            .split_once(',')
            .ok_or_else(|| Error::domain(format!("expected r,m, got {s:?}")))?;
        let dim = m
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::domain(format!("bad dimension {m:?}")))?;
        Self::new(dim, parse_exponent(r)?)
    }
}

impl Serialize for NormedSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NormedSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
