use std::fmt::{Debug, Display};
use std::ops::{AddAssign, MulAssign, Neg, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Zero};

/// Coefficient field of every computation in the engine.
///
/// Implementations must be exact: idempotency and orthogonality checks
/// compare against zero with no tolerance.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Num
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    fn from_int(n: i64) -> Self;

    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_int(n) / Self::from_int(d)
    }

    /// Product without consuming either operand.
    fn times(&self, other: &Self) -> Self;

    /// Multiplicative inverse; `None` for zero.
    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }

    /// `self += a * b`, the inner-loop primitive of every contraction.
    fn add_product(&mut self, a: &Self, b: &Self) {
        if !a.is_zero() && !b.is_zero() {
            *self += &a.times(b);
        }
    }

    fn is_integer(&self) -> bool;
}

impl Scalar for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn times(&self, other: &Self) -> Self {
        self * other
    }

    fn is_integer(&self) -> bool {
        self.denom().is_one()
    }
}

/// Exact rational numbers in lowest terms with positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::from_ratio(n, d)
}

pub fn int<S: Scalar>(n: i64) -> S {
    S::from_int(n)
}

/// Generalized binomial coefficient `binom(a, k)` for a field element `a`.
pub fn binomial<S: Scalar>(a: &S, k: usize) -> S {
    let mut acc = S::one();
    for i in 0..k {
        let num = a.clone() - S::from_int(i as i64);
        acc = acc.times(&num) / S::from_int(i as i64 + 1);
    }
    acc
}

pub fn factorial<S: Scalar>(k: usize) -> S {
    let mut acc = S::one();
    for i in 2..=k {
        acc *= &S::from_int(i as i64);
    }
    acc
}

/// Parse `p`, `-p` or `p/q`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
}
