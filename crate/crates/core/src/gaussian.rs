//! Exact Gaussian rationals `re + i·im` over arbitrary-precision ℚ.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

pub type GQ = GaussianRational;

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Self { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self { re: BigRational::new(BigInt::from(n), BigInt::from(d)), im: BigRational::zero() }
    }

    pub fn from_big(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => Self::from_int(-1),
            _ => -Self::i(),
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NonUnit("zero coefficient".into()));
        }
        let n = self.norm_sqr();
        Ok(Self { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self { re: &self.re * k, im: &self.im * k }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        Self {
            re: BigRational::new(self.re.numer() * &k, self.re.denom().clone()),
            im: BigRational::new(self.im.numer() * &k, self.im.denom().clone()),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Serialized `{re: "a/b", im: "c/d"}` form.
    pub fn to_pair(&self) -> ValuePair {
        ValuePair { re: fmt_big(&self.re), im: fmt_big(&self.im) }
    }

    pub fn from_pair(p: &ValuePair) -> Result<Self> {
        Ok(Self { re: parse_big(&p.re)?, im: parse_big(&p.im)? })
    }
}

pub fn big_ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn fmt_big(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_big(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// A `{re, im}` pair of strings: exact `p/q` for exact values, decimal for numeric ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuePair {
    pub re: String,
    pub im: String,
}

impl ValuePair {
    pub fn from_complex(z: Complex64) -> Self {
        Self { re: format!("{:.16e}", z.re), im: format!("{:.16e}", z.im) }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({}-{}i)", self.re, -self.im.clone())
                } else {
                    write!(f, "({}+{}i)", self.re, self.im)
                }
            }
        }
    }
}

impl<'a> Add<&'a GQ> for &'a GQ {
    type Output = GQ;
    fn add(self, o: &GQ) -> GQ {
        GQ { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GQ> for &'a GQ {
    type Output = GQ;
    fn sub(self, o: &GQ) -> GQ {
        GQ { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GQ> for &'a GQ {
    type Output = GQ;
    fn mul(self, o: &GQ) -> GQ {
        if self.im.is_zero() && o.im.is_zero() {
            return GQ { re: &self.re * &o.re, im: BigRational::zero() };
        }
        GQ { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Add for GQ {
    type Output = GQ;
    fn add(self, o: GQ) -> GQ {
        &self + &o
    }
}

impl Sub for GQ {
    type Output = GQ;
    fn sub(self, o: GQ) -> GQ {
        &self - &o
    }
}

impl Mul for GQ {
    type Output = GQ;
    fn mul(self, o: GQ) -> GQ {
        &self * &o
    }
}

impl AddAssign<&GQ> for GQ {
    fn add_assign(&mut self, o: &GQ) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GQ> for GQ {
    fn sub_assign(&mut self, o: &GQ) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GQ> for GQ {
    fn mul_assign(&mut self, o: &GQ) {
        *self = &*self * o;
    }
}

impl Neg for GQ {
    type Output = GQ;
    fn neg(self) -> GQ {
        GQ { re: -self.re, im: -self.im }
    }
}

impl Neg for &GQ {
    type Output = GQ;
    fn neg(self) -> GQ {
        GQ { re: -self.re.clone(), im: -self.im.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_inverse() {
        let a = GQ::new(big_ratio(1, 2), big_ratio(-3, 4));
        let inv = a.inv().unwrap();
        assert!((&a * &inv).is_one());
        assert_eq!(&GQ::i() * &GQ::i(), GQ::from_int(-1));
        assert_eq!(GQ::i_pow(-1), -GQ::i());
        assert!(GQ::zero().inv().is_err());
    }

    #[test]
    fn pair_round_trip() {
        let a = GQ::new(big_ratio(-5, 6), big_ratio(7, 1));
        assert_eq!(GQ::from_pair(&a.to_pair()).unwrap(), a);
        assert_eq!(a.to_pair().im, "7/1");
    }
}
