//! Numeric abstraction for probabilistic shares.
//!
//! Every mechanism and checker is written against [`Scalar`], so the same code
//! runs on exact rationals (the default, and the only type used for property
//! checks) or on floats for quick experiments. Exact types report a zero
//! tolerance, which turns every approximate comparison below into an exact one.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{NumAssign, Signed, ToPrimitive};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + NumAssign + Send + Sync + 'static
{
    /// `k` as a scalar.
    fn from_count(k: usize) -> Self;

    /// Absolute slack used by the approximate comparisons; zero for exact types.
    fn tolerance() -> Self;

    /// Maps a uniform 64-bit draw `x` to the unit interval as `x / 2^64`
    /// (or the closest value the type can hold).
    fn from_unit_draw(x: u64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_exact() -> bool {
        Self::tolerance().is_zero()
    }

    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn is_positive_share(&self) -> bool {
        *self > Self::tolerance()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    /// `self >= other` up to the tolerance.
    fn approx_ge(&self, other: &Self) -> bool {
        self.clone() + Self::tolerance() >= *other
    }

    /// `self > other` by more than the tolerance.
    fn approx_gt(&self, other: &Self) -> bool {
        self.clone() > other.clone() + Self::tolerance()
    }
}

impl Scalar for BigRational {
    fn from_count(k: usize) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }

    fn tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }

    fn from_unit_draw(x: u64) -> Self {
        BigRational::new(BigInt::from(x), BigInt::from(1u128 << 64))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational64 {
    fn from_count(k: usize) -> Self {
        Rational64::from_integer(k as i64)
    }

    fn tolerance() -> Self {
        Rational64::from_integer(0)
    }

    fn from_unit_draw(x: u64) -> Self {
        Rational64::new((x >> 33) as i64, 1i64 << 31)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Scalar for f64 {
    fn from_count(k: usize) -> Self {
        k as f64
    }

    fn tolerance() -> Self {
        1e-9
    }

    fn from_unit_draw(x: u64) -> Self {
        (x >> 11) as f64 / (1u64 << 53) as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_count(k: usize) -> Self {
        k as f32
    }

    fn tolerance() -> Self {
        1e-5
    }

    fn from_unit_draw(x: u64) -> Self {
        (x >> 40) as f32 / (1u32 << 24) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}
