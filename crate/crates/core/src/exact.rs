//! Conversions between `f64` and exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::mdp::{Mdp, ModelError};

/// Half-width of the window in which [`simplest_rational`] looks for a fraction.
pub const RECOVERY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("value {0} is not finite")]
    NonFinite(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The fraction with the smallest denominator in the closed interval `[lo, hi]`, `0 ≤ lo ≤ hi`.
fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + BigRational::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Simplest rational within [`RECOVERY_TOLERANCE`] of `x`.
///
/// Recovers short decimals and small fractions (`0.999` → `999/1000`,
/// `1.0/3.0` → `1/3`) from their binary approximations.
pub fn simplest_rational(x: f64) -> Result<BigRational, ExactError> {
    if !x.is_finite() {
        return Err(ExactError::NonFinite(x));
    }
    let exact = BigRational::from_float(x).ok_or(ExactError::NonFinite(x))?;
    if exact.is_integer() {
        return Ok(exact);
    }
    let tol = BigRational::from_float(RECOVERY_TOLERANCE).expect("finite tolerance");
    let (lo, hi) = (exact.abs() - &tol, exact.abs() + &tol);
    let lo = if lo.is_negative() { BigRational::zero() } else { lo };
    let r = simplest_between(&lo, &hi);
    Ok(if x < 0.0 { -r } else { r })
}

/// Exact image of a floating-point model; distributions must sum to exactly one afterwards.
pub fn to_exact(mdp: &Mdp<f64>) -> Result<Mdp<BigRational>, ExactError> {
    let exact = mdp.try_map_weights(|&w| simplest_rational(w))?;
    let report = exact.validate();
    if !report.is_empty() {
        return Err(ModelError::Invalid(report).into());
    }
    Ok(exact)
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn to_f64_model(mdp: &Mdp<BigRational>) -> Mdp<f64> {
    mdp.try_map_weights(|r| Ok::<_, std::convert::Infallible>(to_f64(r)))
        .unwrap_or_else(|e| match e {})
}

/// Parses `p/q`, an integer, or a decimal with optional exponent (`0.25`, `1e-3`).
pub fn parse_rational(token: &str) -> Option<BigRational> {
    if let Some((num, den)) = token.split_once('/') {
        let num: BigInt = parse_int(num)?;
        let den: BigInt = parse_int(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match token.find(['e', 'E']) {
        Some(i) => (&token[..i], token[i + 1..].parse::<i32>().ok()?),
        None => (token, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = [int_part, frac_part].concat();
    let mut value = BigRational::from_integer(all.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Some(if negative { -value } else { value })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn recovers_short_fractions() {
        assert_eq!(simplest_rational(0.999).unwrap(), q(999, 1000));
        assert_eq!(simplest_rational(0.001).unwrap(), q(1, 1000));
        assert_eq!(simplest_rational(1.0 / 3.0).unwrap(), q(1, 3));
        assert_eq!(simplest_rational(0.9 * 1000.0).unwrap(), q(900, 1));
        assert_eq!(simplest_rational(-2.5).unwrap(), q(-5, 2));
        assert_eq!(simplest_rational(0.0).unwrap(), q(0, 1));
        assert!(simplest_rational(f64::NAN).is_err());
    }

    #[test]
    fn parses_rational_syntax() {
        assert_eq!(parse_rational("1/3"), Some(q(1, 3)));
        assert_eq!(parse_rational("0.25"), Some(q(1, 4)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("7"), Some(q(7, 1)));
        assert_eq!(parse_rational("1e-3"), Some(q(1, 1000)));
        assert_eq!(parse_rational("2.5E2"), Some(q(250, 1)));
        assert_eq!(parse_rational("-1"), Some(q(-1, 1)));
        for bad in ["", ".", "1/0", "a", "1/x", "0.3.1", "1e", "--1", "1/-"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }

    proptest! {
        #[test]
        fn small_fractions_round_trip(n in 0i64..1000, d in 1i64..1000) {
            let r = q(n, d);
            prop_assert_eq!(simplest_rational(to_f64(&r)).unwrap(), r);
        }
    }
}
