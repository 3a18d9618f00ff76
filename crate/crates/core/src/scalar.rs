//! Truth-value scalars.
//!
//! Everything in the library is written against [`Scalar`], so the same
//! evaluator runs over arbitrary-precision rationals (the default, and the
//! only exact choice for arbitrary inputs), machine-word rationals, and
//! floats. Floats are handy for quick sweeps but comparisons against 1 are
//! then subject to rounding.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

/// A number type that can carry truth values and distances.
pub trait Scalar: Num + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync {
    /// Converts an exact rational into this type. `None` when the value does
    /// not fit (e.g. a huge denominator for `Ratio<i64>`).
    fn from_rational(r: &BigRational) -> Option<Self>;

    /// Converts back to an exact rational, if the value is finite.
    fn to_rational(&self) -> Option<BigRational>;

    /// Whether arithmetic in this type is exact.
    fn is_exact() -> bool;
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for Ratio<i64> {
    fn from_rational(r: &BigRational) -> Option<Self> {
        Some(Ratio::new(r.numer().to_i64()?, r.denom().to_i64()?))
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(BigRational::new(
            BigInt::from(*self.numer()),
            BigInt::from(*self.denom()),
        ))
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Option<Self> {
        r.to_f64()
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_f64(*self)
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn from_rational(r: &BigRational) -> Option<Self> {
        r.to_f32()
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_f32(*self)
    }

    fn is_exact() -> bool {
        false
    }
}

/// Łukasiewicz implication `min{1 - x + y, 1}`.
pub fn implies<T: Scalar>(x: &T, y: &T) -> T {
    let v = T::one() - x.clone() + y.clone();
    if v > T::one() {
        T::one()
    } else {
        v
    }
}

pub fn max<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub fn min<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Clamps into `[0, 1]`.
pub fn clamp_unit<T: Scalar>(v: T) -> T {
    if v < T::zero() {
        T::zero()
    } else if v > T::one() {
        T::one()
    } else {
        v
    }
}

pub fn in_unit<T: Scalar>(v: &T) -> bool {
    *v >= T::zero() && *v <= T::one()
}

pub fn abs_diff<T: Scalar>(a: &T, b: &T) -> T {
    if a >= b {
        a.clone() - b.clone()
    } else {
        b.clone() - a.clone()
    }
}

/// Shorthand for the exact rational `p/q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats an exact rational as `p/q` in lowest terms, or `p` when integral.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let frac_part: BigInt = frac.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mut numer = num_traits::Signed::abs(&int_part) * &scale + frac_part;
        if negative {
            numer = -numer;
        }
        return Some(BigRational::new(numer, scale));
    }
    text.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Whether the denominator (in lowest terms) is a power of two.
pub fn is_dyadic(r: &BigRational) -> bool {
    let d = r.denom();
    !d.is_zero() && (d & (d - BigInt::one())).is_zero()
}
