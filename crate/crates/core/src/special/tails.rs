//! Kontsevich's `F(q) = Σ (q)_n` at roots of unity and the sum-of-tails identity.

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::GQ;
use crate::rational::{fmt_q, q, qi, Q};
use crate::series::{pochhammer, QZSeries, SeriesPrecision};
use crate::special::theta::eta_and_d;

/// Kronecker symbol `(12/n)`.
pub fn chi12(n: i64) -> i64 {
    match n.rem_euclid(12) {
        1 | 11 => 1,
        5 | 7 => -1,
        _ => 0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KontsevichValue {
    Exact(GQ),
    Approx(Complex64),
}

impl KontsevichValue {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            KontsevichValue::Exact(g) => g.to_complex(),
            KontsevichValue::Approx(c) => *c,
        }
    }
}

/// `F(e(h/k)) = Σ_{n<k} (q)_n`; exact over ℚ(i) when `e(h/k)` is a fourth root of unity.
pub fn kontsevich_at_root(h: i64, k: i64) -> Result<KontsevichValue> {
    if k <= 0 || h.gcd(&k) != 1 {
        return Err(Error::Precondition(format!("need gcd(h,k)=1 and k>0, got h={h}, k={k}")));
    }
    if 4 % k == 0 {
        let xi = GQ::i_pow(4 * h / k);
        let mut term = GQ::one();
        let mut sum = GQ::zero();
        let mut power = GQ::one();
        for _ in 0..k {
            sum += &term;
            power *= &xi;
            term = &term * &(GQ::one() - power.clone());
        }
        return Ok(KontsevichValue::Exact(sum));
    }
    let xi = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * h as f64 / k as f64);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for _ in 0..k {
        sum += term;
        power *= xi;
        term *= Complex64::new(1.0, 0.0) - power;
    }
    Ok(KontsevichValue::Approx(sum))
}

/// Exponent convention of the theta part `Σ n χ₁₂(n) q^{e(n)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TailGrading {
    /// `e(n) = n²/24`
    Full,
    /// `e(n) = (n²-1)/24`
    Shifted,
}

#[derive(Clone, Debug)]
pub struct SumOfTailsFit {
    pub lhs: QZSeries,
    pub eta_part: QZSeries,
    pub theta_part: QZSeries,
    pub sigma: Q,
    pub grading: TailGrading,
    /// First coefficient where `lhs` and `eta_part + sigma·theta_part` differ below the precision.
    pub discrepancy: Option<(Q, Q, GQ, GQ)>,
    /// Which of the four candidates matched the fitting orders.
    pub candidates: Vec<(Q, TailGrading, bool)>,
}

fn theta_part(grading: TailGrading, p: Q) -> QZSeries {
    let mut terms = Vec::new();
    let mut n = 1i64;
    loop {
        let e = match grading {
            TailGrading::Full => q(n * n, 24),
            TailGrading::Shifted => q(n * n - 1, 24),
        };
        if e >= p {
            break;
        }
        let c = n * chi12(n);
        if c != 0 {
            terms.push((e, qi(0), GQ::from_int(c)));
        }
        n += 1;
    }
    QZSeries::from_terms(terms, Some(p))
}

/// Left side `Σ_{n≥0} (η - q^{1/24}(q)_n)`; summand `n` has valuation `n + 1 + 1/24`.
fn tails_lhs(p: Q) -> Result<QZSeries> {
    let sp = SeriesPrecision::new(p)?;
    let (eta, _) = eta_and_d(sp);
    let mut acc = QZSeries::zero(Some(p));
    let mut n = 0i64;
    while qi(n + 1) + q(1, 24) < p {
        let part = pochhammer(qi(1), qi(0), &GQ::one(), Some(n as u64), sp)?.mul_monomial(&GQ::one(), q(1, 24), qi(0));
        acc = acc.add(&eta.sub(&part));
        n += 1;
    }
    Ok(acc.truncate(p))
}

/// Fits `σ ∈ {±1/2}` and the theta-part grading on the two lowest orders
/// (`q^{1/24}` and `q^{25/24}`), then checks the fitted identity to `precision`.
pub fn sum_of_tails_sides(precision: SeriesPrecision) -> Result<SumOfTailsFit> {
    let p = precision.target();
    let fit_p = q(1, 24) + qi(2);
    let lhs = tails_lhs(p)?;
    let (eta, d) = eta_and_d(precision);
    let eta_part = eta.mul(&d).truncate(p);
    let mut candidates = Vec::new();
    let mut chosen = None;
    for grading in [TailGrading::Full, TailGrading::Shifted] {
        let tp = theta_part(grading, p);
        for sigma in [q(1, 2), q(-1, 2)] {
            let sg = GQ::from_ratio(*sigma.numer(), *sigma.denom());
            let rhs = eta_part.add(&tp.scale(&sg));
            let ok = lhs.first_difference(&rhs, fit_p).is_none();
            candidates.push((sigma, grading, ok));
            if ok && chosen.is_none() {
                chosen = Some((sigma, grading, tp.clone(), rhs));
            }
        }
    }
    let (sigma, grading, tp, rhs) =
        chosen.ok_or_else(|| Error::NoConsistentFit("no sign and grading match the two lowest orders".into()))?;
    let discrepancy = lhs.first_difference(&rhs, p);
    Ok(SumOfTailsFit { lhs, eta_part, theta_part: tp, sigma, grading, discrepancy, candidates })
}

impl SumOfTailsFit {
    pub fn describe(&self) -> String {
        let g = match self.grading {
            TailGrading::Full => "n^2/24",
            TailGrading::Shifted => "(n^2-1)/24",
        };
        format!("sigma={} exponent={}", fmt_q(&self.sigma), g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi12_values() {
        let v: Vec<i64> = [1, 5, 7, 11, 6, 13, -1].iter().map(|&n| chi12(n)).collect();
        assert_eq!(v, vec![1, -1, -1, 1, 0, 1, 1]);
    }

    #[test]
    fn kontsevich_exact_values() {
        assert_eq!(kontsevich_at_root(0, 1).unwrap(), KontsevichValue::Exact(GQ::one()));
        assert_eq!(kontsevich_at_root(1, 2).unwrap(), KontsevichValue::Exact(GQ::from_int(3)));
        let i = kontsevich_at_root(1, 4).unwrap();
        assert_eq!(i, KontsevichValue::Exact(GQ::from_int(8) - GQ::i().scale_int(3)));
        assert!(kontsevich_at_root(2, 4).is_err());
    }

    #[test]
    fn lhs_low_orders() {
        let lhs = tails_lhs(qi(3)).unwrap();
        assert!(lhs.coeff(q(1, 24), qi(0)).is_zero());
        assert_eq!(lhs.coeff(q(25, 24), qi(0)), GQ::from_int(-1));
    }

    #[test]
    fn fitted_form() {
        let fit = sum_of_tails_sides(SeriesPrecision::new(qi(12)).unwrap()).unwrap();
        assert_eq!((fit.sigma, fit.grading), (q(1, 2), TailGrading::Full));
        assert!(fit.discrepancy.is_none());
        let printed = fit.candidates.iter().find(|c| c.0 == q(-1, 2) && c.1 == TailGrading::Shifted).unwrap();
        assert!(!printed.2);
    }
}
