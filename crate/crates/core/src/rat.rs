//! Exact rational scalars.
//!
//! Every mass, transition probability, Green value, q-value and kernel value
//! in this crate is a [`Rational`]. Values are always stored in lowest terms
//! with a positive denominator, so equality is exact structural equality and
//! no comparison ever involves a tolerance.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision fraction, the scalar for all chain quantities.
pub type Rational = num_rational::BigRational;

/// `0/1`
pub fn zero() -> Rational {
    Rational::zero()
}

/// `1/1`
pub fn one() -> Rational {
    Rational::one()
}

/// Builds `num/den` from machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Parses a `"num/den"` or `"num"` string into an exact rational.
///
/// Whitespace around the tokens is accepted; the denominator must be nonzero.
pub fn parse(text: &str) -> Result<Rational, Error> {
    let bad = |_| Error::RationalParse(text.to_string());
    let t = text.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let num: BigInt = n.trim().parse().map_err(bad)?;
            let den: BigInt = d.trim().parse().map_err(bad)?;
            if den.is_zero() {
                return Err(Error::RationalParse(text.to_string()));
            }
            Ok(Rational::new(num, den))
        }
        None => {
            let num: BigInt = t.parse().map_err(bad)?;
            Ok(Rational::from_integer(num))
        }
    }
}

/// Renders as `"num/den"`, always with an explicit denominator (`1` → `"1/1"`).
///
/// This is the canonical form used in CSV tables and JSON reports.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Nearest `f64`, for diagnostics and rendering only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of approximations for huge components.
        let n = r.numer().to_f64().unwrap_or(if r.numer().is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse("3/6").unwrap();
        assert_eq!(r, ratio(1, 2));
        assert_eq!(format(&r), "1/2");
        assert_eq!(format(&parse("5").unwrap()), "5/1");
        assert_eq!(parse("-2/4").unwrap(), ratio(-1, 2));
    }

    #[test]
    fn parse_rejects_zero_denominator_and_junk() {
        assert!(parse("1/0").is_err());
        assert!(parse("a/b").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn stored_in_lowest_terms_with_positive_denominator() {
        let r = Rational::new(BigInt::from(4), BigInt::from(-6));
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
    }

    #[test]
    fn arithmetic_is_exact() {
        // 1/3 + 1/3 + 1/3 == 1 exactly, which would fail in floating point.
        let third = ratio(1, 3);
        assert_eq!(&third + &third + &third, one());
        assert_eq!(pow(&ratio(1, 2), 10), ratio(1, 1024));
    }
}
