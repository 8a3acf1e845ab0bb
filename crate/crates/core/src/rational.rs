//! Exact rationals and their text form.
//!
//! Rationals are written `p/q` in lowest terms, or `p` when the denominator is one.

use alloc::format;
use alloc::string::String;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Parses `p/q`, an integer, or a finite decimal such as `-1.25`.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::InvalidParams(format!("not a rational: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().map_err(|_| bad())? };
        let frac_part: BigInt = fp.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let mut q = Rational::new(whole * &scale + frac_part, scale);
        if neg {
            q = -q;
        }
        return Ok(q);
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn format(q: &Rational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Rounds a float to the nearest multiple of `1/denominator`.
pub fn rationalize(x: f64, denominator: u64) -> Result<Rational> {
    if !x.is_finite() || denominator == 0 {
        return Err(Error::InvalidParams(format!("cannot rationalize {x} at 1/{denominator}")));
    }
    let scaled = libm::round(x * denominator as f64);
    let n = BigInt::from(scaled as i128);
    Ok(Rational::new(n, BigInt::from(denominator)))
}

/// Exact `q^e` for a nonnegative integer exponent.
pub fn pow(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

/// Whether `q` is a positive integer small enough to be used as an exponent.
pub fn as_small_integer(q: &Rational) -> Option<u32> {
    if q.is_integer() && q.is_positive() {
        q.to_integer().to_u32()
    } else {
        None
    }
}
