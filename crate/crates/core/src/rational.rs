//! Exact rational helpers: parsing user input and ratio checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{EspError, Result};

/// Parses `"3"`, `"1/4"` or `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || EspError::Parameter(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = match whole.trim_start_matches('-') {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let value = BigRational::new(whole * &scale + frac, scale);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// A positive rational parameter such as ε.
pub fn parse_positive(text: &str) -> Result<BigRational> {
    let r = parse_rational(text)?;
    if !r.is_positive() {
        return Err(EspError::Parameter(format!("{text} must be positive")));
    }
    Ok(r)
}

/// 2.7182818285, a rational upper bound on e.
pub fn e_upper() -> BigRational {
    BigRational::new(BigInt::from(27_182_818_285u64), BigInt::from(10_000_000_000u64))
}

/// `alg ≤ factor · opt`, exactly.
pub fn within_factor(alg: u64, opt: u64, factor: &BigRational) -> bool {
    BigRational::from_integer(BigInt::from(alg)) <= factor * BigRational::from_integer(BigInt::from(opt))
}

/// `alg / opt` as a float; 1 when both are zero.
pub fn ratio_f64(alg: u64, opt: u64) -> f64 {
    if opt == 0 {
        if alg == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        alg as f64 / opt as f64
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer ≥ r.
pub fn ceil_u64(r: &BigRational) -> u64 {
    r.ceil().to_integer().to_u64().expect("non-negative value fits in u64")
}

pub fn one() -> BigRational {
    BigRational::one()
}
