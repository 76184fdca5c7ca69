//! Small-rational helpers used for exponents, precisions and parameters.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exponent / precision rational.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

/// Formats as `p/q` (always with a denominator, for bit-stable output).
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q`, `p`, or a short decimal such as `0.5`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(Q::new(n, d))
    } else if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = fp.len() as u32;
        if digits > 12 || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = 10i64.pow(digits);
        let ipart: i64 = if ip.is_empty() || ip == "-" { 0 } else { ip.parse().map_err(|_| bad())? };
        let fpart: i64 = if fp.is_empty() { 0 } else { fp.parse().map_err(|_| bad())? };
        let mag = ipart.abs() * scale + fpart;
        Ok(Q::new(if neg { -mag } else { mag }, scale))
    } else {
        Ok(Q::from_integer(s.parse().map_err(|_| bad())?))
    }
}

/// True when `x` is an integer multiple of 1/2.
pub fn is_half_integer(x: &Q) -> bool {
    (*x * 2).is_integer()
}

/// `(-1)^k` for an integer-valued rational.
pub fn neg_one_pow(k: &Q) -> i64 {
    debug_assert!(k.is_integer());
    if k.to_integer().is_even() {
        1
    } else {
        -1
    }
}

pub fn floor_q(x: &Q) -> i64 {
    x.floor().to_integer()
}

pub fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn min_q(a: Q, b: Q) -> Q {
    if a < b {
        a
    } else {
        b
    }
}

pub fn abs_q(x: &Q) -> Q {
    if x.is_negative() {
        -*x
    } else if x.is_zero() {
        Q::zero()
    } else {
        *x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q("-7").unwrap(), qi(-7));
        assert_eq!(parse_q("-0.5").unwrap(), q(-1, 2));
        assert_eq!(parse_q("2.25").unwrap(), q(9, 4));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert_eq!(fmt_q(&qi(3)), "3/1");
    }
}
