use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Absolute tolerance for comparisons in floating-point mode.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Arithmetic shared by the exact (rational) and floating-point code paths.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_count(k: usize) -> Self;
    fn to_f64(&self) -> f64;
    /// Negative beyond the mode's comparison tolerance.
    fn is_definitely_negative(&self) -> bool;
    fn clamp_nonnegative(self) -> Self;
}

impl Scalar for f64 {
    fn from_count(k: usize) -> Self {
        k as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_definitely_negative(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
    fn clamp_nonnegative(self) -> Self {
        self.max(0.0)
    }
}

impl Scalar for BigRational {
    fn from_count(k: usize) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn is_definitely_negative(&self) -> bool {
        self.is_negative()
    }
    fn clamp_nonnegative(self) -> Self {
        if self.is_negative() {
            BigRational::zero()
        } else {
            self
        }
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        return v;
    }
    // Numerator and denominator both overflow f64; scale them down together.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// A quantity produced by an exact or floating-point computation.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Exact(BigRational),
    Float(f64),
}

impl Real {
    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => ratio_to_f64(r),
            Real::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_zero(),
            Real::Float(x) => x.abs() <= FLOAT_TOLERANCE,
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) => write!(f, "{r}"),
            Real::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Real::Exact(r) => serializer.collect_str(r),
            Real::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal string into an exact rational.
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
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// The simplest fraction `p/q` with `q <= 2^32` within `1e-15 |x|` of `x`,
/// so that parameters such as `0.025` become `1/40` rather than the binary
/// value of the float; the exact binary value when no such fraction exists.
pub fn simple_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let tol = 1e-15 * x.abs();
    // Continued-fraction convergents h/k.
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e18 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > 1 << 32 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= tol {
            return Some(BigRational::new(h1.into(), k1.into()));
        }
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    BigRational::from_float(x)
}
