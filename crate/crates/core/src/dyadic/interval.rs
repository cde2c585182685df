use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DyadicRational;
use crate::error::{Error, Result};

/// Deepest level an interval may live on; positions fit in a `u64`.
pub const MAX_LEVEL: u32 = 62;

/// The half-open interval `[pos·2^{-level}, (pos+1)·2^{-level})`.
///
/// Ordering is by level, then position. Tie-breaks throughout the crate rely on
/// this order ("smallest level, then smallest pos").
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    level: u32,
    pos: u64,
}

impl DyadicInterval {
    pub const UNIT: DyadicInterval = DyadicInterval { level: 0, pos: 0 };

    pub fn new(level: u32, pos: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::InvalidInterval(format!(
                "{level}:{pos} (level above {MAX_LEVEL})"
            )));
        }
        if pos >= 1u64 << level {
            return Err(Error::InvalidInterval(format!(
                "{level}:{pos} (position must be below 2^{level})"
            )));
        }
        Ok(Self { level, pos })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn pos(&self) -> u64 {
        self.pos
    }

    pub fn measure(&self) -> DyadicRational {
        DyadicRational::recip_pow2(self.level)
    }

    /// Lebesgue measure as a float (exact: a power of two).
    pub fn length(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            pos: self.pos >> 1,
        })
    }

    pub fn left(&self) -> Self {
        Self {
            level: self.level + 1,
            pos: self.pos << 1,
        }
    }

    pub fn right(&self) -> Self {
        Self {
            level: self.level + 1,
            pos: (self.pos << 1) | 1,
        }
    }

    /// The ancestor-or-self at `level`; `None` when `level` is deeper.
    pub fn ancestor_at(&self, level: u32) -> Option<Self> {
        (level <= self.level).then(|| Self {
            level,
            pos: self.pos >> (self.level - level),
        })
    }

    /// Strict ancestors, from the parent up to `[0,1)`.
    pub fn ancestors(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        (0..self.level)
            .rev()
            .map(move |l| self.ancestor_at(l).unwrap())
    }

    /// `other ⊆ self` as point sets.
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && (other.pos >> (other.level - self.level)) == self.pos
    }

    pub fn strictly_contains(&self, other: &DyadicInterval) -> bool {
        other.level > self.level && self.contains(other)
    }

    pub fn is_disjoint(&self, other: &DyadicInterval) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    /// Cells of the level-`grid` partition covered by this interval, as an
    /// index range. Requires `grid >= level`.
    pub fn cell_range(&self, grid: u32) -> std::ops::Range<usize> {
        debug_assert!(grid >= self.level);
        let shift = grid - self.level;
        let start = (self.pos << shift) as usize;
        start..start + (1usize << shift)
    }

    /// +1 on the left half, -1 on the right half of `self` for the level-`grid`
    /// cell `cell`, 0 outside.
    pub fn haar_sign(&self, grid: u32, cell: usize) -> f64 {
        let range = self.cell_range(grid);
        if !range.contains(&cell) {
            0.0
        } else if cell < range.start + range.len() / 2 {
            1.0
        } else {
            -1.0
        }
    }

    /// Every interval of `D_{≤depth}`, in level/position order.
    pub fn all_up_to(depth: u32) -> impl Iterator<Item = DyadicInterval> {
        (0..=depth).flat_map(|level| (0..1u64 << level).map(move |pos| Self { level, pos }))
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.pos)
    }
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.pos)
    }
}

impl FromStr for DyadicInterval {
    type Err = Error;

    /// Parses the `n:k` text form.
    fn from_str(s: &str) -> Result<Self> {
        let (n, k) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::InvalidInterval(format!("{s:?} (expected n:k)")))?;
        let level = n
            .parse::<u32>()
            .map_err(|_| Error::InvalidInterval(format!("{s:?} (bad level)")))?;
        let pos = k
            .parse::<u64>()
            .map_err(|_| Error::InvalidInterval(format!("{s:?} (bad position)")))?;
        Self::new(level, pos)
    }
}

impl Serialize for DyadicInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DyadicInterval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for tests and examples: `iv(2, 1)` is `[1/4, 1/2)`.
pub fn iv(level: u32, pos: u64) -> DyadicInterval {
    DyadicInterval::new(level, pos).expect("valid dyadic interval")
}
