use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Ordered field used by the exact-capable parts of the crate.
///
/// Floats compare with a relative tolerance, rationals compare exactly.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Absolute/relative slack used by `ge_tol` and friends. Zero for exact types.
    fn tolerance() -> Self;
    fn is_exact() -> bool;
    fn from_rational(r: &BigRational) -> Self;
    fn from_float(x: f64) -> Self;
    fn as_f64(&self) -> f64;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn ratio(p: i64, q: i64) -> Self {
        Self::from_int(p) / Self::from_int(q)
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

    fn slack(reference: &Self) -> Self {
        let one = Self::one();
        let mag = reference.abs();
        Self::tolerance() * if mag > one { mag } else { one }
    }

    /// `a >= b` up to tolerance.
    fn ge_tol(a: &Self, b: &Self) -> bool {
        a.clone() >= b.clone() - Self::slack(b)
    }

    /// `a > b`, relaxed by the tolerance for floats.
    fn gt_tol(a: &Self, b: &Self) -> bool {
        if Self::is_exact() {
            a > b
        } else {
            a.clone() > b.clone() - Self::slack(b)
        }
    }

    fn eq_tol(a: &Self, b: &Self) -> bool {
        (a.clone() - b.clone()).abs() <= Self::slack(b)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
    fn is_exact() -> bool {
        false
    }
    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
    fn from_float(x: f64) -> Self {
        x
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
    fn is_exact() -> bool {
        false
    }
    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r) as f32
    }
    fn from_float(x: f64) -> Self {
        x as f32
    }
    fn as_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }
    fn is_exact() -> bool {
        true
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_float(x: f64) -> Self {
        BigRational::from_f64(x).expect("finite float")
    }
    fn as_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // numerator/denominator may individually overflow f64
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as u64;
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Parses "p/q", an integer, or a finite decimal ("0.132") into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let scale = exp - frac.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    value *= num_traits::pow::Pow::pow(&ten, scale);
    Ok(if neg { -value } else { value })
}

pub fn parse_scalar<T: Scalar>(s: &str) -> Result<T, Error> {
    parse_rational(s).map(|r| T::from_rational(&r))
}

/// Canonical text form: "p/q" (or "p") for rationals, shortest round-trip for floats.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds to `bits` significant binary digits; used by the high-precision recurrences.
pub fn round_to_bits(r: &BigRational, bits: u32) -> BigRational {
    if r.is_zero() {
        return r.clone();
    }
    let n = r.numer().abs();
    let d = r.denom().clone();
    let e = n.bits() as i64 - d.bits() as i64;
    let shift = bits as i64 - e;
    let two = BigInt::from(2);
    let (num, den) = if shift >= 0 {
        (n << shift as usize, d)
    } else {
        (n, d << (-shift) as usize)
    };
    let q = (&num * &two + &den) / (&den * &two);
    let mut out = BigRational::from_integer(q);
    if shift >= 0 {
        out /= BigRational::from_integer(num_traits::pow::Pow::pow(&two, shift as u64));
    } else {
        out *= BigRational::from_integer(num_traits::pow::Pow::pow(&two, (-shift) as u64));
    }
    if r.is_negative() {
        -out
    } else {
        out
    }
}

pub fn int_to_scalar<T: Scalar>(n: usize) -> T {
    T::from_rational(&BigRational::from_integer(
        BigInt::from_usize(n).expect("usize fits"),
    ))
}
