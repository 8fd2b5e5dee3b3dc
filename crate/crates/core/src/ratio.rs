//! Exact rational values.
//!
//! Every measure, metric value and threshold in the crate is a
//! [`Rational`]: arbitrary-precision, always in canonical reduced form with
//! positive denominator. Rendering is the fixed `p/q` form so reports
//! round-trip without loss.

use num::bigint::BigInt;
use num::{One, Zero};

pub type Rational = num::BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Renders `p/q` with an explicit denominator ("3/4", "0/1", "-1/2").
pub fn render(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational `{0}` (expected p or p/q with q > 0)")]
pub struct ParseRationalError(pub String);

/// Parses `p` or `p/q`; `q` must be nonzero.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let bad = || ParseRationalError(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = num.trim().parse().map_err(|_| bad())?;
    let d: BigInt = den.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}
