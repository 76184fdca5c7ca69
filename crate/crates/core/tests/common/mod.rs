//! Strategies and property bodies shared by the property tests and the acceptance target.
#![allow(dead_code)]

use mjf_core::rational::{q, qi, Q};
use mjf_core::series::{DVar, QZSeries};
use mjf_core::GQ;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

fn small_gq() -> impl Strategy<Value = GQ> {
    (-4i64..=4, -4i64..=4, 1i64..=3).prop_map(|(a, b, d)| GQ::from_ratio(a, d) + GQ::i().scale_int(b))
}

/// Truncated series with q-exponents in `½ℤ ∩ [0, 3)`, ζ-exponents in `[-2, 2]` and precision in `[3, 6]`.
pub fn series() -> impl Strategy<Value = QZSeries> {
    (prop::collection::vec((0i64..6, -2i64..=2, small_gq()), 0..6), 3i64..=6).prop_map(|(terms, p)| {
        QZSeries::from_terms(terms.into_iter().map(|(a, s, c)| (q(a, 2), qi(s), c)), Some(qi(p)))
    })
}

/// Series whose lowest slice is a single nonzero constant term, hence invertible.
pub fn unit() -> impl Strategy<Value = QZSeries> {
    (series(), (1i64..=3, 1i64..=2)).prop_map(|(s, (n, d))| {
        let tail = s.mul_monomial(&GQ::one(), q(1, 2), qi(0));
        tail.add(&QZSeries::constant(GQ::from_ratio(n, d), None))
    })
}

fn prec_of(a: &QZSeries) -> Q {
    a.prec().unwrap_or(qi(1000))
}

pub fn same(a: &QZSeries, b: &QZSeries) -> Result<(), TestCaseError> {
    let p = prec_of(a).min(prec_of(b));
    prop_assert!(a.first_difference(b, p).is_none(), "{a} != {b} below q^{p}");
    Ok(())
}

pub fn ring_axioms(a: &QZSeries, b: &QZSeries, c: &QZSeries) -> Result<(), TestCaseError> {
    same(&a.mul(b), &b.mul(a))?;
    same(&a.add(b), &b.add(a))?;
    same(&a.mul(b).mul(c), &a.mul(&b.mul(c)))?;
    same(&a.mul(&b.add(c)), &a.mul(b).add(&a.mul(c)))?;
    same(&a.add(&a.neg()), &QZSeries::zero(a.prec()))?;
    same(&a.mul(&QZSeries::one(None)), a)
}

pub fn inversion_round_trip(u: &QZSeries, a: &QZSeries) -> Result<(), TestCaseError> {
    let inv = u.invert().map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    same(&u.mul(&inv), &QZSeries::one(None))?;
    let back = a.mul(u).div(u).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    same(&back, a)
}

/// Every coefficient claimed exact at low precision agrees with the same
/// computation from better inputs.
pub fn precision_soundness(a: &QZSeries, b: &QZSeries, u: &QZSeries) -> Result<(), TestCaseError> {
    let cut = |s: &QZSeries| s.truncate(prec_of(s) - qi(1));
    let coarse = cut(a).mul(&cut(b)).div(&cut(u)).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    let fine = a.mul(b).div(u).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    prop_assert!(prec_of(&coarse) <= prec_of(&fine));
    same(&coarse, &fine)
}

pub fn leibniz(a: &QZSeries, b: &QZSeries) -> Result<(), TestCaseError> {
    for v in [DVar::Tau, DVar::Z] {
        let lhs = a.mul(b).apply_d(v);
        let rhs = a.apply_d(v).mul(b).add(&a.mul(&b.apply_d(v)));
        same(&lhs, &rhs)?;
    }
    Ok(())
}
