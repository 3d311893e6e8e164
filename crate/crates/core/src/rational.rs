//! Exact dyadic rationals and helpers for general rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// General exact rational used for base-space weights and ν-integrals.
pub type Rational = BigRational;

/// A dyadic rational `num / 2^exp` kept in normal form: either zero with
/// `exp == 0`, or `num` odd.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            num: BigInt::one(),
            exp: 0,
        }
    }

    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut num = num.into();
        let mut exp = exp;
        if num.is_zero() {
            return Dyadic::zero();
        }
        while exp > 0 && num.is_even() {
            num >>= 1;
            exp -= 1;
        }
        Dyadic { num, exp }
    }

    /// `2^{-k}`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic::new(1, k)
    }

    /// `count / 2^depth`, the measure of `count` leaves at `depth`.
    pub fn leaves(count: usize, depth: u32) -> Self {
        Dyadic::new(BigInt::from(count), depth)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    /// Exact conversion from a rational whose reduced denominator is a power of two.
    pub fn from_rational(r: &Rational) -> Option<Self> {
        let den = r.denom();
        if den.is_zero() {
            return None;
        }
        let bits = den.bits();
        if bits == 0 || (den.clone() & (den - BigInt::one())) != BigInt::zero() {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), (bits - 1) as u32))
    }

    /// If `self * 2^depth` is an integer, return it.
    pub fn scaled_count(&self, depth: u32) -> Option<BigInt> {
        if self.exp > depth {
            None
        } else {
            Some(&self.num << (depth - self.exp))
        }
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, u32) {
        let e = self.exp.max(other.exp);
        (
            &self.num << (e - self.exp),
            &other.num << (e - other.exp),
            e,
        )
    }

    pub fn half(&self) -> Self {
        Dyadic::new(self.num.clone(), self.exp + 1)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul<u64> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: u64) -> Dyadic {
        Dyadic::new(&self.num * BigInt::from(rhs), self.exp)
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
    }
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let r = parse_rational(s)?;
        Dyadic::from_rational(&r).ok_or_else(|| {
            Error::InvalidArgument(format!("{s} is not a dyadic rational"))
        })
    }
}

/// Prints a rational as `p/q` in lowest terms, always with an explicit denominator.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("malformed rational `{s}`"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}
