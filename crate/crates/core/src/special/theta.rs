//! Jacobi θ, Dedekind η, `D(τ)` and the congruence theta series `ϑ_{m,ℓ}`.

use num_traits::Zero;

use crate::error::Result;
use crate::gaussian::GQ;
use crate::rational::{q, qi, Q};
use crate::series::{pochhammer, QZSeries, SeriesPrecision};

/// `θ(z) = -i ζ^{-1/2} q^{1/8} (q)_∞ (ζ)_∞ (ζ^{-1}q)_∞`, exact below `q^precision`.
pub fn theta_series(precision: SeriesPrecision) -> QZSeries {
    let p = precision.target();
    let inner = SeriesPrecision::new(p - q(1, 8)).unwrap_or(precision);
    let a = pochhammer(qi(1), qi(0), &GQ::one(), None, inner).expect("positive base");
    let b = pochhammer(qi(0), qi(1), &GQ::one(), None, inner).expect("zero base");
    let c = pochhammer(qi(1), qi(-1), &GQ::one(), None, inner).expect("positive base");
    a.mul(&b).mul(&c).mul_monomial(&-GQ::i(), q(1, 8), q(-1, 2))
}

/// Sum form `Σ_{ν ∈ ½+ℤ} i(-1)^{ν-1/2} q^{ν²/2} ζ^ν` of the same function.
pub fn theta_sum_form(precision: SeriesPrecision) -> QZSeries {
    let p = precision.target();
    let mut terms = Vec::new();
    let mut k = 0i64;
    loop {
        // ν = ±(k + 1/2)
        let nu = q(2 * k + 1, 2);
        let e = nu * nu / 2;
        if e >= p {
            break;
        }
        for (nu, sign_exp) in [(nu, k), (-nu, -k - 1)] {
            let sign = if sign_exp.rem_euclid(2) == 0 { 1 } else { -1 };
            terms.push((e, nu, GQ::i().scale_int(sign)));
        }
        k += 1;
    }
    QZSeries::from_terms(terms, Some(p))
}

/// `θ(z + 1/2)`, the numerator factor of the Kac–Wakimoto characters.
pub fn theta_shifted_half(precision: SeriesPrecision) -> Result<QZSeries> {
    theta_series(precision).shift_z(Q::zero(), q(1, 2))
}

/// `(η, D)` with `η = q^{1/24}(q)_∞` and `D = -1/2 + Σ_{n≥1} q^n/(1-q^n)`.
pub fn eta_and_d(precision: SeriesPrecision) -> (QZSeries, QZSeries) {
    let p = precision.target();
    let inner = SeriesPrecision::new(p - q(1, 24)).unwrap_or(precision);
    let eta = pochhammer(qi(1), qi(0), &GQ::one(), None, inner).expect("positive base").mul_monomial(
        &GQ::one(),
        q(1, 24),
        qi(0),
    );
    let mut terms = vec![(qi(0), qi(0), GQ::from_ratio(-1, 2))];
    let mut n = 1i64;
    while qi(n) < p {
        let mut k = n;
        while qi(k) < p {
            terms.push((qi(k), qi(0), GQ::one()));
            k += n;
        }
        n += 1;
    }
    (eta, QZSeries::from_terms(terms, Some(p)))
}

/// `ϑ_{m,ℓ}(z) = Σ_{n ≡ ℓ (mod 2m)} q^{n²/4m} ζ^n`.
pub fn theta_vv(m: i64, ell: i64, precision: SeriesPrecision) -> QZSeries {
    assert!(m > 0, "theta_vv needs a positive index");
    let p = precision.target();
    let modulus = 2 * m;
    let r = ell.rem_euclid(modulus);
    let mut terms = Vec::new();
    for start in [r, r - modulus] {
        let step = if start >= 0 { modulus } else { -modulus };
        let mut n = start;
        loop {
            let e = q(n * n, 4 * m);
            if e >= p {
                break;
            }
            terms.push((e, qi(n), GQ::one()));
            n += step;
        }
    }
    QZSeries::from_terms(terms, Some(p))
}
