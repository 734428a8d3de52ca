//! Scalar fields used for Lie algebra coordinates.
//!
//! Structure constants are always exact rationals. Coordinates may be exact
//! (`Rational`) or binary floating point (`f64`); the exact mode is the one
//! used for certificates, the float mode for fast sampling and oracles.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Arithmetic needed by every generic routine in the crate.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn from_q(q: &Rational) -> Self;
    fn from_real(x: f64) -> Self;
    fn to_f64(&self) -> f64;

    /// `|self|^(1/n)`, exact up to the rounding of one f64 `powf`.
    fn root_approx(&self, n: u32) -> Self {
        Self::from_real(self.to_f64().abs().powf(1.0 / n as f64))
    }

    /// Square root when it is exactly representable as a rational.
    fn sqrt_exact(&self) -> Option<Rational> {
        None
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn floor_val(&self) -> Self;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_q(q: &Rational) -> Self {
        q.clone()
    }

    fn from_real(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite f64")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn root_approx(&self, n: u32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let r = Scalar::to_f64(&self.abs()).powf(1.0 / n as f64);
        if r.is_finite() && r > 0.0 {
            Self::from_real(r)
        } else {
            rational_root_bisect(&self.abs(), n)
        }
    }

    fn sqrt_exact(&self) -> Option<Rational> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(BigRational::new(n, d))
        } else {
            None
        }
    }

    fn floor_val(&self) -> Self {
        self.floor()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_q(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn from_real(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn floor_val(&self) -> Self {
        self.floor()
    }
}

/// Fallback for magnitudes outside the f64 exponent range: bisection on a
/// rational bracket until 60 bits of relative agreement.
fn rational_root_bisect(x: &Rational, n: u32) -> Rational {
    let one = Rational::one();
    let (mut lo, mut hi) = if *x < one {
        (Rational::zero(), one)
    } else {
        (one, x.clone())
    };
    for _ in 0..4096 {
        let mid = (&lo + &hi) / Rational::from_integer(BigInt::from(2));
        if num_traits::pow(mid.clone(), n as usize) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
        if !lo.is_zero() && (&hi - &lo) / &lo < Rational::new(BigInt::one(), BigInt::one() << 60) {
            break;
        }
    }
    let approx = Scalar::to_f64(&lo);
    if approx.is_finite() && approx > 0.0 {
        <Rational as FromPrimitive>::from_f64(approx).unwrap_or(lo)
    } else {
        lo
    }
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse `"p/q"`, an integer, or a plain decimal such as `"-0.125"` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A rational coordinate read from JSON: either a string (`"1/2"`, `"0.25"`)
/// or a JSON number.
#[derive(Debug, Clone, PartialEq, serde::Deserialize, serde::Serialize)]
#[serde(untagged)]
pub enum RationalInput {
    Text(String),
    Int(i64),
    Float(f64),
}

impl From<String> for RationalInput {
    fn from(s: String) -> Self {
        RationalInput::Text(s)
    }
}

impl From<&Rational> for RationalInput {
    fn from(r: &Rational) -> Self {
        RationalInput::Text(format_rational(r))
    }
}

impl RationalInput {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            RationalInput::Text(s) => parse_rational(s),
            RationalInput::Int(i) => Ok(qi(*i)),
            RationalInput::Float(x) => <BigRational as FromPrimitive>::from_f64(*x)
                .ok_or_else(|| Error::Parse(format!("non-finite number {x}"))),
        }
    }
}
