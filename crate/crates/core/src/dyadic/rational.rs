//! Exact dyadic rationals `num / 2^exp`.
//!
//! Every measure, Carleson constant and maximal-function integral in this crate
//! is a finite sum of powers of two, so this small carrier keeps the identities
//! exact. Quotients of two dyadic rationals (C₁, Carleson ratios) are not
//! dyadic in general; those use [`Fraction`].

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// General exact rational, used for quotients such as C₁.
pub type Fraction = Ratio<i128>;

/// Exact value `num · 2^{-exp}`, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    num: i128,
    exp: u32,
}

impl DyadicRational {
    pub const ZERO: DyadicRational = DyadicRational { num: 0, exp: 0 };
    pub const ONE: DyadicRational = DyadicRational { num: 1, exp: 0 };

    pub fn new(num: i128, exp: u32) -> Self {
        Self { num, exp }.normalized()
    }

    pub fn from_int(n: i128) -> Self {
        Self { num: n, exp: 0 }
    }

    /// `2^{-k}`, the measure of a level-`k` dyadic interval.
    pub fn recip_pow2(k: u32) -> Self {
        Self { num: 1, exp: k }
    }

    /// `2^k` for a signed exponent.
    pub fn pow2(k: i32) -> Self {
        if k >= 0 {
            Self::from_int(1i128.checked_shl(k as u32).expect("dyadic overflow"))
        } else {
            Self::recip_pow2(k.unsigned_abs())
        }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    /// Multiply by `2^k` (k may be negative).
    pub fn scale_pow2(self, k: i32) -> Self {
        self * Self::pow2(k)
    }

    pub fn to_f64(&self) -> f64 {
        // exact for |num| < 2^53; the exponent scaling is exact for exp < 1075
        (self.num as f64) * (-(self.exp as f64)).exp2()
    }

    pub fn to_fraction(&self) -> Fraction {
        let den = 1i128.checked_shl(self.exp).expect("dyadic overflow");
        Fraction::new(self.num, den)
    }

    pub fn abs(self) -> Self {
        Self {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn normalized(mut self) -> Self {
        if self.num == 0 {
            self.exp = 0;
            return self;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
        self
    }

    /// Numerators of `self` and `other` brought to the common exponent.
    fn aligned(self, other: Self) -> (i128, i128, u32) {
        let exp = self.exp.max(other.exp);
        let a = shl(self.num, exp - self.exp);
        let b = shl(other.num, exp - other.exp);
        (a, b, exp)
    }
}

fn shl(n: i128, k: u32) -> i128 {
    if n == 0 {
        return 0;
    }
    assert!(
        k < 127 && n.unsigned_abs().leading_zeros() > k + 1,
        "dyadic overflow"
    );
    n << k
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Add for DyadicRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b, exp) = self.aligned(rhs);
        Self::new(a.checked_add(b).expect("dyadic overflow"), exp)
    }
}

impl AddAssign for DyadicRational {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for DyadicRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for DyadicRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Mul for DyadicRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.num.checked_mul(rhs.num).expect("dyadic overflow"),
            self.exp.checked_add(rhs.exp).expect("dyadic overflow"),
        )
    }
}

impl Sum for DyadicRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DyadicRational {
    type Err = Error;

    /// Accepts `num/2^exp` or a bare integer.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::parse(0, format!("bad dyadic rational {s:?}"));
        match s.split_once("/2^") {
            Some((n, e)) => {
                let num = n.trim().parse::<i128>().map_err(|_| bad())?;
                let exp = e.trim().parse::<u32>().map_err(|_| bad())?;
                Ok(Self::new(num, exp))
            }
            None => s.parse::<i128>().map(Self::from_int).map_err(|_| bad()),
        }
    }
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Render a fraction as `num/den`.
pub fn fraction_string(x: &Fraction) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Serde helper writing a fraction as its `num/den` string.
pub fn serialize_fraction<S: Serializer>(x: &Fraction, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fraction_string(x))
}

pub fn fraction_to_f64(x: &Fraction) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: i128, e: u32) -> DyadicRational {
        DyadicRational::new(n, e)
    }

    #[test]
    fn normalizes_to_lowest_terms() {
        assert_eq!(d(4, 3), d(1, 1));
        assert_eq!(d(0, 9).exponent(), 0);
        assert_eq!(d(6, 0).exponent(), 0);
        assert_eq!(d(-8, 2), DyadicRational::from_int(-2));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(d(1, 1) + d(1, 2), d(3, 2));
        assert_eq!(d(1, 1) - d(1, 2), d(1, 2));
        assert_eq!(d(3, 1) * d(1, 3), d(3, 4));
        assert_eq!(DyadicRational::pow2(3), DyadicRational::from_int(8));
        assert_eq!(DyadicRational::pow2(-2), d(1, 2));
        assert!(d(1, 1) > d(3, 3));
        assert_eq!(d(7, 2).to_fraction(), Fraction::new(7, 4));
        assert_eq!(d(7, 2).to_f64(), 1.75);
    }

    #[test]
    fn text_form() {
        assert_eq!(d(5, 3).to_string(), "5/2^3");
        assert_eq!("5/2^3".parse::<DyadicRational>().unwrap(), d(5, 3));
        assert_eq!("12".parse::<DyadicRational>().unwrap(), d(3, 0) * d(4, 0));
        assert!("1/3".parse::<DyadicRational>().is_err());
    }

    proptest! {
        #[test]
        fn ring_laws_and_order(a in -1000i128..1000, ea in 0u32..20,
                               b in -1000i128..1000, eb in 0u32..20,
                               c in -1000i128..1000, ec in 0u32..20) {
            let (x, y, z) = (d(a, ea), d(b, eb), d(c, ec));
            prop_assert_eq!((x + y) + z, x + (y + z));
            prop_assert_eq!(x * (y + z), x * y + x * z);
            prop_assert_eq!(x + y - y, x);
            prop_assert_eq!(x.cmp(&y), x.to_fraction().cmp(&y.to_fraction()));
            prop_assert_eq!((x * y).to_fraction(), x.to_fraction() * y.to_fraction());
        }
    }
}
