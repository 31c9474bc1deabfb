//! Numeric backends.
//!
//! All pricing and market code is written once against [`Scalar`]. The
//! exact backend makes the welfare guarantees checkable with zero
//! tolerance; the float backend is for sampling sweeps where exactness buys
//! nothing.

use core::fmt::{Debug, Display};
use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational numbers.
pub type Exact = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Sum
    + for<'a> Sum<&'a Self>
    + Send
    + Sync
{
    /// Identifier recorded in reports ("exact" or "float").
    const NAME: &'static str;

    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Converts a float. Rationals take the exact dyadic value of `x`.
    /// Returns `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// The exact value of `self`. Floats map to their dyadic value, and
    /// non-finite floats to zero.
    fn to_exact(&self) -> Exact;

    /// Nearest representable value to `x`.
    fn from_exact(x: &Exact) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "float";
    const EXACT: bool = false;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_exact(&self) -> Exact {
        BigRational::from_float(*self).unwrap_or_else(Exact::zero)
    }

    fn from_exact(x: &Exact) -> Self {
        ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Scalar for BigRational {
    const NAME: &'static str = "exact";
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Exact {
        self.clone()
    }

    fn from_exact(x: &Exact) -> Self {
        x.clone()
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// Converts between backends, exactly when the target is [`Exact`].
pub fn convert<A: Scalar, B: Scalar>(x: &A) -> B {
    B::from_exact(&x.to_exact())
}
