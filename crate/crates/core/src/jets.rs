//! Laurent jets in `x = 2πi(z - u)` with q-series coefficients.
//!
//! A [`Jet`] stores the coefficients of `x^k` for `order_lo ≤ k ≤ order_hi`.
//! For a theta quotient with a pole at `u`, the coefficients of `x^{-n}` are
//! exactly the Laurent data `D_{n,u}` with no extra powers of `2πi`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GQ;
use crate::quotient::JacobiQuotient;
use crate::rational::{fmt_q, parse_q, q, qi, Q};
use crate::series::{inv_factorial, min_prec, QZSeries, SeriesPrecision};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    /// `u = λτ + μ` as `(λ, μ)`.
    pub center: (Q, Q),
    pub order_lo: i64,
    pub order_hi: i64,
    coeffs: Vec<QZSeries>,
}

impl Jet {
    /// Builds a jet from coefficients of `x^{order_lo}, x^{order_lo+1}, …`.
    pub fn new(center: (Q, Q), order_lo: i64, coeffs: Vec<QZSeries>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("a jet needs at least one coefficient".into()));
        }
        let order_hi = order_lo + coeffs.len() as i64 - 1;
        Ok(Self { center, order_lo, order_hi, coeffs })
    }

    /// Coefficient of `x^k`; zero outside the stored range below `order_lo`.
    pub fn coeff(&self, k: i64) -> Option<&QZSeries> {
        if k < self.order_lo || k > self.order_hi {
            return None;
        }
        self.coeffs.get((k - self.order_lo) as usize)
    }

    pub fn coeffs(&self) -> &[QZSeries] {
        &self.coeffs
    }

    /// Smallest precision among the coefficients.
    pub fn prec(&self) -> Option<Q> {
        self.coeffs.iter().fold(None, |acc, c| match acc {
            None => c.prec(),
            Some(_) => min_prec(acc, c.prec()),
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let lo = self.order_lo + other.order_lo;
        let hi = (self.order_lo + other.order_hi).min(other.order_lo + self.order_hi);
        let coeffs = (lo..=hi)
            .map(|n| {
                let mut acc: Option<QZSeries> = None;
                for i in self.order_lo..=self.order_hi {
                    let j = n - i;
                    if let (Some(a), Some(b)) = (self.coeff(i), other.coeff(j)) {
                        let t = a.mul(b);
                        acc = Some(match acc {
                            None => t,
                            Some(s) => s.add(&t),
                        });
                    }
                }
                acc.unwrap_or_else(|| QZSeries::zero(None))
            })
            .collect();
        Self { center: self.center, order_lo: lo, order_hi: hi, coeffs }
    }

    /// Inverse `x^{-lo} · (unit)^{-1}`; needs a nonzero coefficient at `order_lo`.
    pub fn invert(&self) -> Result<Self> {
        let u0 = &self.coeffs[0];
        if u0.is_empty() {
            return Err(Error::OrderMismatch(self.order_lo));
        }
        let v0 = u0.invert()?;
        let len = self.coeffs.len();
        let mut v: Vec<QZSeries> = vec![v0.clone()];
        for n in 1..len {
            let mut acc = QZSeries::zero(None);
            for k in 1..=n {
                acc = acc.add(&self.coeffs[k].mul(&v[n - k]));
            }
            v.push(acc.mul(&v0).neg());
        }
        Ok(Self {
            center: self.center,
            order_lo: -self.order_lo,
            order_hi: -self.order_lo + (self.order_hi - self.order_lo),
            coeffs: v,
        })
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.invert()? } else { self.clone() };
        let e = n.unsigned_abs();
        if e == 0 {
            let len = (self.order_hi - self.order_lo + 1) as usize;
            let mut coeffs = vec![QZSeries::one(None)];
            coeffs.resize(len, QZSeries::zero(None));
            return Ok(Self { center: self.center, order_lo: 0, order_hi: len as i64 - 1, coeffs });
        }
        let mut acc = base.clone();
        for _ in 1..e {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Truncates every coefficient below `q^p`.
    pub fn truncate(&self, p: Q) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.truncate(p)).collect(), ..self.clone() }
    }
}

/// Taylor jet of `θ(z + b)` at `z = 0` in `x = 2πiz`, for `b ∈ ½ℤ`:
/// `a_k = (1/k!) Σ_ν ν^k i(-1)^{ν-1/2} e(νb) q^{ν²/2}`.
pub fn theta_taylor_jet(shift_one: Q, order_hi: i64, precision: SeriesPrecision) -> Result<Jet> {
    if !(shift_one * 2).is_integer() {
        return Err(Error::Precondition(format!("shift {} is not a half-integer", fmt_q(&shift_one))));
    }
    let p = precision.target();
    let mut nus = Vec::new();
    let mut k = 0i64;
    loop {
        let nu = q(2 * k + 1, 2);
        if nu * nu / 2 >= p {
            break;
        }
        nus.push((nu, k));
        nus.push((-nu, -k - 1));
        k += 1;
    }
    let coeffs = (0..=order_hi.max(0))
        .map(|order| {
            let terms = nus.iter().map(|&(nu, sign_exp)| {
                let sign = if sign_exp.rem_euclid(2) == 0 { 1 } else { -1 };
                // e(νb) with νb ∈ ¼ℤ
                let phase = GQ::i_pow((nu * shift_one * 4).to_integer());
                let nu_big = BigRational::new(BigInt::from(*nu.numer()), BigInt::from(*nu.denom()));
                let mut w = inv_factorial(order as u32);
                for _ in 0..order {
                    w *= &nu_big;
                }
                let c = (GQ::i().scale_int(sign) * phase).scale(&w);
                (nu * nu / 2, qi(0), c)
            });
            QZSeries::from_terms(terms, Some(p))
        })
        .collect::<Vec<_>>();
    let lo = coeffs.iter().position(|c| !c.is_empty()).unwrap_or(0) as i64;
    Jet::new((qi(0), shift_one), lo, coeffs[lo as usize..].to_vec())
}

/// Jet of `θ` at `z = 0`; `a_0 = 0`, so the stored range starts at `x^1`.
pub fn theta_jet_at_zero(order_hi: i64, precision: SeriesPrecision) -> Result<Jet> {
    theta_taylor_jet(qi(0), order_hi, precision)
}

/// Principal-part data at a pole: `D[n-1] = D_{n,u}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentData {
    pub pole: (Q, Q),
    pub d: Vec<QZSeries>,
}

impl LaurentData {
    pub fn order(&self) -> usize {
        self.d.len()
    }

    /// `D_{n,u}` for `n ≥ 1`, zero beyond the pole order.
    pub fn get(&self, n: usize) -> QZSeries {
        self.d.get(n - 1).cloned().unwrap_or_else(|| QZSeries::zero(None))
    }

    pub fn to_json(&self) -> LaurentJson {
        LaurentJson {
            pole: PoleJson { lambda: fmt_q(&self.pole.0), mu: fmt_q(&self.pole.1) },
            order: self.d.len(),
            d: self.d.clone(),
        }
    }

    pub fn from_json(j: &LaurentJson) -> Result<Self> {
        if j.d.len() != j.order {
            return Err(Error::Parse("D length differs from the pole order".into()));
        }
        Ok(Self { pole: (parse_q(&j.pole.lambda)?, parse_q(&j.pole.mu)?), d: j.d.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleJson {
    pub lambda: String,
    pub mu: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentJson {
    pub pole: PoleJson,
    pub order: usize,
    #[serde(rename = "D")]
    pub d: Vec<QZSeries>,
}

/// Full jet of a lattice-supported quotient at `z = 0`.
pub fn quotient_jet(quotient: &JacobiQuotient, order_hi: i64, precision: SeriesPrecision) -> Result<Jet> {
    if !quotient.is_lattice_supported() || !quotient.zeta_power().is_zero() {
        return Err(Error::Precondition(format!(
            "exact Laurent data needs factors θ(z+b) with b ∈ ½ℤ, got {}",
            quotient.label()
        )));
    }
    let mut acc: Option<Jet> = None;
    for f in &quotient.factors {
        let j = theta_taylor_jet(f.shift_one, order_hi, precision)?.pow(f.exponent)?;
        acc = Some(match acc {
            None => j,
            Some(a) => a.mul(&j),
        });
    }
    acc.ok_or_else(|| Error::Precondition("empty quotient".into()))
}

/// `D_{n,0}` for a lattice-supported quotient, exact below `q^precision`.
///
/// Intermediate jets are built with a precision margin that is raised until every
/// returned coefficient is certified to the requested order.
pub fn laurent_coeffs(quotient: &JacobiQuotient, order_hi: i64, precision: SeriesPrecision) -> Result<LaurentData> {
    let p = precision.target();
    let mut margin = qi(1) + Q::new(quotient.factors.iter().map(|f| f.exponent.abs()).sum::<i64>(), 4);
    for _ in 0..8 {
        let jet = quotient_jet(quotient, order_hi, SeriesPrecision::new(p + margin)?)?;
        if jet.order_lo >= 0 {
            return Ok(LaurentData { pole: (qi(0), qi(0)), d: Vec::new() });
        }
        let d: Vec<QZSeries> = (1..=-jet.order_lo).map(|n| jet.coeff(-n).cloned().unwrap()).collect();
        if d.iter().all(|s| s.prec().is_some_and(|sp| sp >= p)) {
            return Ok(LaurentData { pole: (qi(0), qi(0)), d: d.iter().map(|s| s.truncate(p)).collect() });
        }
        margin *= 2;
    }
    Err(Error::PrecisionUnreachable(fmt_q(&p)))
}
