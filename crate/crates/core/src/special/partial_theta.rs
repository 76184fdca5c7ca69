//! Partial theta functions `θ⁺_{ℓ,ε,M}(z) = Σ_{n≥0} (-1)^{nε} q^{(2Mn-ℓ)²/4M} ζ^{2Mn-ℓ}`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gaussian::GQ;
use crate::rational::{is_half_integer, Q};
use crate::series::{QZSeries, SeriesPrecision};

fn check(ell: Q, eps: u8, level: Q) -> Result<()> {
    if level <= Q::zero() || !is_half_integer(&level) {
        return Err(Error::Precondition(format!("level M must be a positive half-integer, got {level}")));
    }
    if !is_half_integer(&ell) {
        return Err(Error::Precondition(format!("ℓ must be a half-integer, got {ell}")));
    }
    if eps > 1 {
        return Err(Error::Precondition("ε must be 0 or 1".into()));
    }
    Ok(())
}

/// Exponent pairs `(q-exp, ζ-exp, sign)` of the partial theta sum below `p`.
fn summands(ell: Q, eps: u8, level: Q, p: Q) -> Vec<(Q, Q, i64)> {
    let mut out = Vec::new();
    let mut n = 0i64;
    loop {
        let s = level * 2 * n - ell;
        let e = s * s / (level * 4);
        if e >= p && s > Q::zero() {
            break;
        }
        if e < p {
            let sign = if eps == 1 && n % 2 == 1 { -1 } else { 1 };
            out.push((e, s, sign));
        }
        n += 1;
    }
    out
}

pub fn partial_theta(ell: Q, eps: u8, level: Q, precision: SeriesPrecision) -> Result<QZSeries> {
    check(ell, eps, level)?;
    let p = precision.target();
    Ok(QZSeries::from_terms(
        summands(ell, eps, level, p).into_iter().map(|(e, s, sign)| (e, s, GQ::from_int(sign))),
        Some(p),
    ))
}

/// `𝒟_z^k θ⁺_{ℓ,ε,M}(z)|_{z=0} = Σ (-1)^{nε} (2Mn-ℓ)^k q^{(2Mn-ℓ)²/4M}`, a ζ-free series.
pub fn partial_theta_derivative_at_zero(
    ell: Q,
    eps: u8,
    level: Q,
    k: u32,
    precision: SeriesPrecision,
) -> Result<QZSeries> {
    check(ell, eps, level)?;
    let p = precision.target();
    Ok(QZSeries::from_terms(
        summands(ell, eps, level, p).into_iter().map(|(e, s, sign)| {
            let base = BigRational::new((*s.numer()).into(), (*s.denom()).into());
            let mut w = BigRational::one();
            for _ in 0..k {
                w *= &base;
            }
            (e, Q::zero(), GQ::from_big(w).scale_int(sign))
        }),
        Some(p),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::series::DVar;

    fn sp(p: Q) -> SeriesPrecision {
        SeriesPrecision::new(p).unwrap()
    }

    #[test]
    fn first_summand() {
        let t = partial_theta(q(3, 2), 0, q(1, 2), sp(qi(1))).unwrap();
        // ℓ²/4M = 9/8 ≥ 1, but n = 1 gives (1 - 3/2)² / 2 = 1/8
        assert_eq!(t.coeff(q(1, 8), q(-1, 2)), GQ::one());
        let t = partial_theta(q(1, 2), 1, q(1, 2), sp(qi(2))).unwrap();
        assert_eq!(t.coeff(q(1, 8), q(-1, 2)), GQ::one());
    }

    #[test]
    fn level_three_halves() {
        let t = partial_theta(q(1, 2), 1, q(3, 2), sp(qi(6))).unwrap();
        let expect = QZSeries::from_terms(
            [
                (q(1, 24), q(-1, 2), GQ::one()),
                (q(25, 24), q(5, 2), GQ::from_int(-1)),
                (q(121, 24), q(11, 2), GQ::one()),
            ],
            Some(qi(6)),
        );
        assert_eq!(t, expect);
    }

    #[test]
    fn derivative_matches_d_z_then_zeta_one() {
        let (ell, eps, lvl) = (q(-1, 2), 1, q(3, 2));
        let base = partial_theta(ell, eps, lvl, sp(qi(30))).unwrap();
        let mut d = base.clone();
        for k in 0..4u32 {
            let direct = partial_theta_derivative_at_zero(ell, eps, lvl, k, sp(qi(30))).unwrap();
            assert_eq!(direct, d.at_zeta_one());
            d = d.apply_d(DVar::Z);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(partial_theta(q(1, 3), 0, q(1, 2), sp(qi(2))).is_err());
        assert!(partial_theta(q(1, 2), 2, q(1, 2), sp(qi(2))).is_err());
        assert!(partial_theta(q(1, 2), 0, qi(0), sp(qi(2))).is_err());
    }
}
