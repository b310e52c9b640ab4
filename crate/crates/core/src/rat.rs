//! Rational number helpers: parsing from `p/q` or decimal strings, canonical
//! formatting, and small constructors used throughout the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

use crate::error::Error;

pub type Rat = BigRational;

/// `p/q` from machine integers.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Parse a rational from `p/q`, an integer, or a decimal string such as
/// `0.00858` (converted exactly, never through floating point).
pub fn parse_rat(text: &str) -> Result<Rat, Error> {
    let s = text.trim();
    let bad = || Error::BadRational(s.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let abs = Rat::new(w.abs() * &scale + f, scale);
        return Ok(if neg { -abs } else { abs });
    }
    // Scientific notation for the spec'd 1e-7 style inputs.
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        let m = parse_rat(mant)?;
        let e: i32 = exp.parse().map_err(|_| bad())?;
        let p = Rat::from_integer(BigInt::from(10u32).pow(e.unsigned_abs()));
        return Ok(if e >= 0 { m * p } else { m / p });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

/// Canonical `p/q` rendering (integers stay bare).
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Ceiling of a nonnegative rational, as usize.
pub fn ceil_to_usize(r: &Rat) -> Option<usize> {
    if r.is_negative() {
        return None;
    }
    let c = r.ceil();
    c.numer().try_into().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_decimal_and_integer() {
        assert_eq!(parse_rat("7/8").unwrap(), rat(7, 8));
        assert_eq!(parse_rat("0.00858").unwrap(), rat(858, 100_000));
        assert_eq!(parse_rat("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rat("42").unwrap(), rat_int(42));
        assert_eq!(parse_rat("1e-7").unwrap(), rat(1, 10_000_000));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rat(&rat(4, 2)), "2");
        assert_eq!(format_rat(&rat(6, 4)), "3/2");
        assert_eq!(format_rat(&rat(-6, 4)), "-3/2");
    }
}
