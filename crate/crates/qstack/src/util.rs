//! Small shared helpers: rational parsing/printing, reproducible hashing,
//! and the float formatting used by every emitted table.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Parse a rational from the `"p/q"` wire form (plain integers allowed).
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let make_err = || Error::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| make_err())?;
    let den: BigInt = den.parse().map_err(|_| make_err())?;
    if den.is_zero() {
        return Err(make_err());
    }
    Ok(BigRational::new(num, den))
}

/// Canonical `"p/q"` form (reduced, denominator positive, `q = 1` kept explicit).
pub fn fmt_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Exact conversion to `f64` via numerator/denominator division.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Scale through strings only as a last resort; the magnitudes in this
    // crate stay far below f64 range.
    let nf = bigint_to_f64(num);
    let df = bigint_to_f64(den);
    nf / df
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    b.to_f64().unwrap_or(if b.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Reduce a rational into `[0, 1)`.
pub fn frac_mod_1(r: &BigRational) -> BigRational {
    let fl = r.floor();
    r - fl
}

/// Distance on the circle `R/Z` between two fractional positions.
pub fn circle_dist_f64(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// All floats in emitted tables carry 17 significant digits so that re-runs
/// diff byte-for-byte.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// FNV-1a over bytes; used to stamp outputs with a config hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse_ratio("610/987").unwrap();
        assert_eq!(fmt_ratio(&r), "610/987");
        assert_eq!(fmt_ratio(&parse_ratio("4/8").unwrap()), "1/2");
        assert_eq!(fmt_ratio(&parse_ratio("3").unwrap()), "3/1");
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x/2").is_err());
    }

    #[test]
    fn circle_distance_wraps() {
        assert!((circle_dist_f64(0.99, 0.01) - 0.02).abs() < 1e-15);
        assert!((circle_dist_f64(0.25, 0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn float_format_is_17_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }
}
