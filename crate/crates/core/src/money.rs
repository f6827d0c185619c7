//! Exact non-negative money and probability values.
//!
//! Everything on the mechanism and verification paths is an exact rational.
//! Floats only appear in Monte Carlo estimates.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Money = BigRational;

pub fn int(v: i64) -> Money {
    Money::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Money {
    Money::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Money {
    Money::zero()
}

pub fn one() -> Money {
    Money::one()
}

/// Parses `"10"`, `"0.25"`, `"-1"` or `"1/3"`.
pub fn parse_money(text: &str) -> Result<Money> {
    let t = text.trim();
    let bad = || Error::InvalidInput(format!("not a decimal number: {text:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Money::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{}{}", if whole.is_empty() { "0" } else { whole }, frac);
    let num = BigInt::from_str(&digits).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let v = Money::new(num, den);
    Ok(if neg { -v } else { v })
}

/// Formats as a terminating decimal when possible and as `p/q` otherwise,
/// so that `parse_money(format_money(x)) == x` always holds.
pub fn format_money(v: &Money) -> String {
    if v.is_integer() {
        return v.numer().to_string();
    }
    let mut den = v.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", v.numer(), v.denom());
    }
    let places = twos.max(fives);
    let scaled = v * Money::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (w, f) = digits.split_at(digits.len() - places);
    let sign = if v.is_negative() { "-" } else { "" };
    format!("{sign}{w}.{f}")
}

pub fn to_f64(v: &Money) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of `1..=k`.
pub fn lcm_upto(k: u32) -> u64 {
    (1..=k as u64).fold(1, num_integer::lcm)
}
