//! Exact quantities: the rationals as a zero-totalized field.
//!
//! Every operation is total. In particular `inv(0) = 0`, so `p / 0 = 0`
//! for every `p`, and `p / p` is `1` when `p != 0` and `0` otherwise.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An exact rational number with a totalized inverse.
///
/// Always stored in lowest terms with a positive denominator, so derived
/// equality is equality of values.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quantity(BigRational);

impl Quantity {
    pub fn zero() -> Self {
        Quantity(BigRational::zero())
    }

    pub fn one() -> Self {
        Quantity(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Quantity(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Quantity(BigRational::from_integer(n))
    }

    /// `numer / denom`, reduced. A zero denominator yields zero, matching
    /// the totalized division.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Quantity::from_int(numer).div(&Quantity::from_int(denom))
    }

    pub fn from_big_ratio(numer: BigInt, denom: BigInt) -> Self {
        if denom.is_zero() {
            return Quantity::zero();
        }
        Quantity(BigRational::new(numer, denom))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn add(&self, other: &Quantity) -> Quantity {
        Quantity(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Quantity) -> Quantity {
        Quantity(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Quantity) -> Quantity {
        Quantity(&self.0 * &other.0)
    }

    pub fn neg(&self) -> Quantity {
        Quantity(-&self.0)
    }

    /// Zero-totalized inverse: `inv(0) = 0`.
    pub fn inv(&self) -> Quantity {
        if self.0.is_zero() {
            Quantity::zero()
        } else {
            Quantity(self.0.recip())
        }
    }

    /// `self · inv(other)`; division by zero yields zero.
    pub fn div(&self, other: &Quantity) -> Quantity {
        self.mul(&other.inv())
    }

    pub fn abs(&self) -> Quantity {
        Quantity(self.0.abs())
    }

    /// Integer power with `pow(0) = 1`.
    pub fn pow(&self, exp: u32) -> Quantity {
        let mut acc = Quantity::one();
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Add for Quantity {
    type Output = Quantity;
    fn add(self, rhs: Quantity) -> Quantity {
        Quantity(self.0 + rhs.0)
    }
}

impl Sub for Quantity {
    type Output = Quantity;
    fn sub(self, rhs: Quantity) -> Quantity {
        Quantity(self.0 - rhs.0)
    }
}

impl Mul for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity(self.0 * rhs.0)
    }
}

/// Lets `x.add(&y)` type-check when `x` is owned, where the by-value
/// operator would otherwise shadow the inherent method.
macro_rules! ref_rhs {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<&Quantity> for Quantity {
            type Output = Quantity;
            fn $m(self, rhs: &Quantity) -> Quantity {
                Quantity::$m(&self, rhs)
            }
        }
    )*};
}

ref_rhs!(Add add, Sub sub, Mul mul);

impl Neg for Quantity {
    type Output = Quantity;
    fn neg(self) -> Quantity {
        Quantity(-self.0)
    }
}

impl From<i64> for Quantity {
    fn from(n: i64) -> Self {
        Quantity::from_int(n)
    }
}

/// Prints `p/q` in lowest terms, or `p` when the denominator is one.
impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid quantity literal `{0}`")]
pub struct ParseQuantityError(pub String);

/// Accepts `n`, `-n`, `p/q` and `-p/q`. A zero denominator is rejected
/// here even though the arithmetic would totalize it, since a literal
/// `x/0` is almost certainly a typo.
impl FromStr for Quantity {
    type Err = ParseQuantityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseQuantityError(s.to_string());
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| err())?;
        let den: BigInt = den.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Quantity(BigRational::new(num, den)))
    }
}
