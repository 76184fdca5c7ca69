//! Level-2M Appell–Lerch sums
//! `F_{M,ε}(z,u) = (ζ w^{-1})^M Σ_n (-1)^{nε} w^{-2Mn} q^{Mn(n+1)} / (1 - q^n ζ w^{-1})`
//! and their `v`-derivatives, kept as finite sums of
//! `coeff · q^a ζ^b (1 - q^k ζ)^{-j}` terms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{ValuePair, GQ};
use crate::rational::{fmt_q, is_half_integer, parse_q, Q};

/// Coefficients of `𝒟_v^d` applied to one `n`-summand, before setting `w`.
///
/// The summand is `c · w^a (1-t)^{-1}` with `t = q^n ζ w^{-1}` and
/// `a = -M - 2Mn`. Since `𝒟_v w^a = a w^a` and
/// `𝒟_v (1-t)^{-j} = -j(1-t)^{-j-1} + j(1-t)^{-j}`, the `d`-th derivative is
/// `w^a Σ_j c_j (1-t)^{-j}` with `c_j` polynomial in `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct AppellDerivative {
    pub level: Q,
    pub eps: u8,
    pub order: u32,
}

impl AppellDerivative {
    pub fn new(level: Q, eps: u8, order: u32) -> Result<Self> {
        if level <= Q::zero() || !is_half_integer(&level) {
            return Err(Error::Precondition(format!("Appell level must be a positive half-integer, got {level}")));
        }
        if eps > 1 {
            return Err(Error::Precondition("ε must be 0 or 1".into()));
        }
        Ok(Self { level, eps, order })
    }

    /// The `w`-exponent `a = -M - 2Mn` of summand `n`.
    pub fn w_exponent(&self, n: i64) -> Q {
        -self.level - self.level * 2 * n
    }

    /// `c_j` for `j = 1..=order+1` (index `j-1`), excluding the sign `(-1)^{nε}`.
    pub fn pole_coefficients(&self, n: i64) -> Vec<BigRational> {
        let a = self.w_exponent(n);
        let a = BigRational::new(BigInt::from(*a.numer()), BigInt::from(*a.denom()));
        let mut c = vec![BigRational::one()];
        for _ in 0..self.order {
            let mut next = vec![BigRational::zero(); c.len() + 1];
            for (idx, cj) in c.iter().enumerate() {
                let j = BigRational::from_integer(BigInt::from(idx as i64 + 1));
                next[idx] += cj * (&a + &j);
                next[idx + 1] -= cj * &j;
            }
            c = next;
        }
        c
    }

    pub fn sign(&self, n: i64) -> i64 {
        if self.eps == 1 && n.rem_euclid(2) == 1 {
            -1
        } else {
            1
        }
    }

    /// `q`-exponent `Mn(n+1)` of summand `n`.
    pub fn q_exponent(&self, n: i64) -> Q {
        self.level * n * (n + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppellTerm {
    pub coeff: GQ,
    pub q_exp: Q,
    pub z_exp: Q,
    pub pole_k: i64,
    pub pole_order: u32,
}

/// `𝒟_v^d F_{M,ε}(z,v)|_{v=0}` as an exact finite term list.
#[derive(Clone, Debug, PartialEq)]
pub struct AppellJet {
    pub level: Q,
    pub eps: u8,
    pub order: u32,
    pub terms: Vec<AppellTerm>,
    /// Summation cutoff `|n| ≤ trunc_k`.
    pub trunc_k: i64,
    pub prec: Q,
}

/// Lower bound for the q-valuation of summand `n` once its pole factor is expanded
/// (the `n < 0` rewrite contributes at least `q^{|n|}`).
fn summand_valuation(level: Q, n: i64) -> Q {
    let base = level * n * (n + 1);
    if n < 0 {
        base + Q::from_integer(-n)
    } else {
        base
    }
}

/// Smallest `K` such that every omitted summand `|n| > K` has valuation `≥ prec`.
pub fn certified_cutoff(level: Q, prec: Q) -> Result<i64> {
    if level <= Q::zero() {
        return Err(Error::PrecisionUnreachable(fmt_q(&prec)));
    }
    let mut k = 0i64;
    loop {
        if summand_valuation(level, k + 1) >= prec && summand_valuation(level, -(k + 1)) >= prec {
            return Ok(k);
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::PrecisionUnreachable(fmt_q(&prec)));
        }
    }
}

/// Entries `d = 0..=jet_order` of `𝒟_v^d F_{M,ε}(z,v)|_{v=0}`.
pub fn appell_f_jet(level: Q, eps: u8, jet_order: u32, prec: Q) -> Result<Vec<AppellJet>> {
    let trunc_k = certified_cutoff(level, prec)?;
    (0..=jet_order)
        .map(|d| {
            let alg = AppellDerivative::new(level, eps, d)?;
            let mut terms = Vec::new();
            for n in -trunc_k..=trunc_k {
                let sign = alg.sign(n);
                for (idx, c) in alg.pole_coefficients(n).into_iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    terms.push(AppellTerm {
                        coeff: GQ::from_big(c).scale_int(sign),
                        q_exp: alg.q_exponent(n),
                        z_exp: level,
                        pole_k: n,
                        pole_order: idx as u32 + 1,
                    });
                }
            }
            Ok(AppellJet { level, eps, order: d, terms, trunc_k, prec })
        })
        .collect()
}

impl AppellJet {
    pub fn to_json(&self) -> AppellJetJson {
        AppellJetJson {
            m: fmt_q(&self.level),
            eps: self.eps,
            trunc_k: self.trunc_k,
            prec: fmt_q(&self.prec),
            terms: self
                .terms
                .iter()
                .map(|t| AppellTermJson {
                    coeff: t.coeff.to_pair(),
                    q_exp: fmt_q(&t.q_exp),
                    z_exp: fmt_q(&t.z_exp),
                    pole_k: t.pole_k,
                    pole_order: t.pole_order,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &AppellJetJson, order: u32) -> Result<Self> {
        Ok(Self {
            level: parse_q(&j.m)?,
            eps: j.eps,
            order,
            trunc_k: j.trunc_k,
            prec: parse_q(&j.prec)?,
            terms: j
                .terms
                .iter()
                .map(|t| {
                    Ok(AppellTerm {
                        coeff: GQ::from_pair(&t.coeff)?,
                        q_exp: parse_q(&t.q_exp)?,
                        z_exp: parse_q(&t.z_exp)?,
                        pole_k: t.pole_k,
                        pole_order: t.pole_order,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppellJetJson {
    #[serde(rename = "M")]
    pub m: String,
    pub eps: u8,
    pub trunc_k: i64,
    pub prec: String,
    pub terms: Vec<AppellTermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppellTermJson {
    pub coeff: ValuePair,
    pub q_exp: String,
    pub z_exp: String,
    pub pole_k: i64,
    pub pole_order: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn zeroth_entry_is_the_plain_sum() {
        let jets = appell_f_jet(q(1, 2), 1, 0, qi(6)).unwrap();
        let f = &jets[0];
        assert_eq!(f.trunc_k, 2);
        let t0 = f.terms.iter().find(|t| t.pole_k == 0).unwrap();
        assert_eq!((t0.coeff.clone(), t0.q_exp, t0.z_exp, t0.pole_order), (GQ::one(), qi(0), q(1, 2), 1));
        let t1 = f.terms.iter().find(|t| t.pole_k == 1).unwrap();
        assert_eq!((t1.coeff.clone(), t1.q_exp), (GQ::from_int(-1), qi(1)));
        let tm2 = f.terms.iter().find(|t| t.pole_k == -2).unwrap();
        assert_eq!((tm2.coeff.clone(), tm2.q_exp), (GQ::one(), qi(1)));
    }

    #[test]
    fn first_derivative_rule() {
        // n = 0, a = -M: d/dv gives (a + 1)(1-ζ)^{-1} - (1-ζ)^{-2}
        let alg = AppellDerivative::new(q(3, 2), 1, 1).unwrap();
        let c = alg.pole_coefficients(0);
        assert_eq!(c, vec![crate::gaussian::big_ratio(-1, 2), crate::gaussian::big_ratio(-1, 1)]);
    }

    #[test]
    fn cutoff_is_certified() {
        for lvl in [q(1, 2), qi(1), q(3, 2)] {
            for p in [qi(1), qi(7), q(51, 2)] {
                let k = certified_cutoff(lvl, p).unwrap();
                for n in (k + 1)..(k + 20) {
                    assert!(summand_valuation(lvl, n) >= p);
                    assert!(summand_valuation(lvl, -n) >= p);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let jets = appell_f_jet(qi(1), 0, 2, qi(4)).unwrap();
        let j = jets[2].to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back: AppellJetJson = serde_json::from_str(&s).unwrap();
        assert_eq!(AppellJet::from_json(&back, 2).unwrap(), jets[2]);
    }
}
