//! Double-precision evaluation with certified truncation tails.
//!
//! Powers with rational exponents follow `q^s := e(sτ)` and `ζ^s := e(sz)`.

pub mod quadrature;
pub mod quantum;
pub mod verify;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quotient::JacobiQuotient;
use crate::rational::{to_f64, Q};

pub use quadrature::{fourier_quadrature, principal_value_line, QuadratureResult, QuadratureSpec};
pub use quantum::{
    cocycle_probe, probe_csv, radial_limit, reduce_partial_theta_standard, CocycleProbe, ProbeRow, RadialLimit,
    RadialTarget, StandardForm,
};
pub use verify::{
    residue_and_elliptic_check, thm1_rhs_numeric, thm2_rhs_numeric, verify_thm1_numeric, verify_thm2_numeric,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalContext {
    pub tau: Complex64,
    /// Maximal number of summands per direction.
    pub cutoff: usize,
    pub eps: f64,
    pub near_pole_radius: f64,
}

impl EvalContext {
    pub fn new(tau: Complex64) -> Result<Self> {
        Self::with(tau, 200_000, 1e-10, 1e-9)
    }

    pub fn with(tau: Complex64, cutoff: usize, eps: f64, near_pole_radius: f64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::Precondition(format!("Im(τ) must be positive, got {}", tau.im)));
        }
        if !(eps > 0.0) || !(near_pole_radius > 0.0) {
            return Err(Error::Precondition("eps and near_pole_radius must be positive".into()));
        }
        Ok(Self { tau, cutoff, eps, near_pole_radius })
    }

    /// Tolerance for each one-sided tail.
    fn tail_tol(&self) -> f64 {
        self.eps * 1e-4
    }
}

/// A value with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Value {
    pub value: Complex64,
    pub err: f64,
}

/// `e(x) = exp(2πix)`.
pub fn e(x: Complex64) -> Complex64 {
    (Complex64::new(0.0, TWO_PI) * x).exp()
}

pub fn e_real(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TWO_PI * x)
}

/// Sums `term(j)` for `j ≥ start` until terms drop below the tail tolerance
/// while shrinking by at least half per step. `term` returns the summand and a
/// bound for its modulus; the bound sequence is assumed log-concave in the tail.
fn one_sided(
    ctx: &EvalContext,
    start: i64,
    step: i64,
    term: &mut impl FnMut(i64) -> Result<(Complex64, f64)>,
) -> Result<Value> {
    let tol = ctx.tail_tol();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut j = start;
    for _ in 0..ctx.cutoff {
        let (v, b) = term(j)?;
        acc += v;
        if b < tol && prev.is_finite() && b <= 0.5 * prev {
            // remaining tail ≤ b·(r + r² + …) with r ≤ 1/2
            return Ok(Value { value: acc, err: b });
        }
        prev = b;
        j += step;
    }
    Err(Error::TailBoundFailure(ctx.cutoff))
}

fn bilateral(ctx: &EvalContext, center: i64, mut term: impl FnMut(i64) -> Result<(Complex64, f64)>) -> Result<Value> {
    let up = one_sided(ctx, center, 1, &mut term)?;
    let down = one_sided(ctx, center - 1, -1, &mut term)?;
    Ok(Value { value: up.value + down.value, err: up.err + down.err })
}

fn unilateral(ctx: &EvalContext, mut term: impl FnMut(i64) -> Result<(Complex64, f64)>) -> Result<Value> {
    one_sided(ctx, 0, 1, &mut term)
}

/// `𝒟_z^k θ(z) = Σ_{ν∈½+ℤ} i(-1)^{ν-½} ν^k q^{ν²/2} ζ^ν`.
pub fn theta_d(z: Complex64, k: u32, ctx: &EvalContext) -> Result<Value> {
    let tau = ctx.tau;
    let center = (-z.im / tau.im).round() as i64;
    bilateral(ctx, center, |j| {
        let nu = j as f64 + 0.5;
        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let ex = e(tau * (nu * nu / 2.0) + z * nu);
        let w = nu.powi(k as i32);
        let bound = nu.abs().max(1.0).powi(k as i32) * ex.norm();
        Ok((Complex64::new(0.0, sign * w) * ex, bound))
    })
}

pub fn theta(z: Complex64, ctx: &EvalContext) -> Result<Value> {
    theta_d(z, 0, ctx)
}

/// `η(τ) = Σ_{n≥1} χ₁₂(n) q^{n²/24}`.
pub fn eta(ctx: &EvalContext) -> Result<Value> {
    let tau = ctx.tau;
    unilateral(ctx, |j| {
        let n = j + 1;
        let c = crate::special::tails::chi12(n) as f64;
        let ex = e(tau * ((n * n) as f64 / 24.0));
        Ok((ex * c, ex.norm()))
    })
}

/// `𝒟_z^k θ⁺_{ℓ,ε,M}(z) = Σ_{n≥0} (-1)^{nε} s^k q^{s²/4M} ζ^s`, `s = 2Mn - ℓ`.
pub fn partial_theta_d(ell: Q, eps: u8, level: Q, k: u32, z: Complex64, ctx: &EvalContext) -> Result<Value> {
    if level <= Q::from_integer(0) || eps > 1 {
        return Err(Error::Precondition("partial theta needs M > 0 and ε ∈ {0,1}".into()));
    }
    let (l, m) = (to_f64(&ell), to_f64(&level));
    let tau = ctx.tau;
    unilateral(ctx, |n| {
        let s = 2.0 * m * n as f64 - l;
        let sign = if eps == 1 && n % 2 == 1 { -1.0 } else { 1.0 };
        let ex = e(tau * (s * s / (4.0 * m)) + z * s);
        Ok((ex * (sign * s.powi(k as i32)), s.abs().max(1.0).powi(k as i32) * ex.norm()))
    })
}

/// Coefficients `c_j` (`j = 1..=d+1`) of `𝒟_v^d [w^a (1-t)^{-1}] = w^a Σ c_j (1-t)^{-j}`.
pub fn appell_pole_coeffs(a: f64, d: u32) -> Vec<f64> {
    let mut c = vec![1.0];
    for _ in 0..d {
        let mut next = vec![0.0; c.len() + 1];
        for (idx, cj) in c.iter().enumerate() {
            let j = idx as f64 + 1.0;
            next[idx] += cj * (a + j);
            next[idx + 1] -= cj * j;
        }
        c = next;
    }
    c
}

/// `𝒟_v^d F_{M,ε}(z,v)` at `v = u`, from the exact derivative algebra.
pub fn appell_d(level: Q, eps: u8, d: u32, z: Complex64, u: Complex64, ctx: &EvalContext) -> Result<Value> {
    if level <= Q::from_integer(0) || eps > 1 {
        return Err(Error::Precondition("Appell sum needs M > 0 and ε ∈ {0,1}".into()));
    }
    let m = to_f64(&level);
    let tau = ctx.tau;
    let pre = e(z * m);
    let center = ((u.im - z.im) / tau.im).round() as i64;
    let v = bilateral(ctx, center, |n| {
        let nf = n as f64;
        let a = -m - 2.0 * m * nf;
        let t = e(tau * nf + z - u);
        let one_minus = Complex64::new(1.0, 0.0) - t;
        if one_minus.norm() < ctx.near_pole_radius {
            return Err(Error::NearPole { radius: one_minus.norm() });
        }
        let sign = if eps == 1 && n.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let head = e(tau * (m * nf * (nf + 1.0)) + u * a);
        let inv = one_minus.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        let mut p = inv;
        for cj in appell_pole_coeffs(a, d) {
            acc += p * cj;
            mag += cj.abs() * p.norm();
            p *= inv;
        }
        Ok((head * acc * sign, head.norm() * mag))
    })?;
    Ok(Value { value: pre * v.value, err: pre.norm() * v.err })
}

/// `ζ^{Σea} ∏ θ(z + aτ + b)^e`.
pub fn phi(quotient: &JacobiQuotient, z: Complex64, ctx: &EvalContext) -> Result<Value> {
    let mut value = e(z * to_f64(&quotient.zeta_power()));
    let mut rel = 0.0;
    for f in &quotient.factors {
        let point = z + ctx.tau * to_f64(&f.shift_tau) + to_f64(&f.shift_one);
        let th = theta(point, ctx)?;
        if f.exponent < 0 && th.value.norm() < ctx.near_pole_radius {
            return Err(Error::NearPole { radius: th.value.norm() });
        }
        value *= th.value.powi(f.exponent as i32);
        rel += f.exponent.unsigned_abs() as f64 * th.err / th.value.norm().max(f64::MIN_POSITIVE);
    }
    Ok(Value { value, err: value.norm() * rel })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Which {
    Theta,
    Eta,
    Phi(JacobiQuotient),
    Appell { level: Q, eps: u8 },
    PartialTheta { ell: Q, eps: u8, level: Q },
}

/// Evaluates a named function at `z` (and `u` for the Appell sum).
pub fn eval_point(which: &Which, z: Complex64, u: Option<Complex64>, ctx: &EvalContext) -> Result<Value> {
    match which {
        Which::Theta => theta(z, ctx),
        Which::Eta => eta(ctx),
        Which::Phi(quo) => phi(quo, z, ctx),
        Which::Appell { level, eps } => {
            let u = u.ok_or_else(|| Error::Precondition("the Appell sum needs u".into()))?;
            appell_d(*level, *eps, 0, z, u, ctx)
        }
        Which::PartialTheta { ell, eps, level } => partial_theta_d(*ell, *eps, *level, 0, z, ctx),
    }
}

/// Truncated Laurent series `Σ_{k ≥ lo} c[k-lo] x^k` with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexJet {
    pub lo: i64,
    pub c: Vec<Complex64>,
}

impl ComplexJet {
    pub fn hi(&self) -> i64 {
        self.lo + self.c.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k < self.lo {
            return Complex64::new(0.0, 0.0);
        }
        self.c.get((k - self.lo) as usize).copied().unwrap_or_default()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.c.len().min(other.c.len());
        let mut c = vec![Complex64::new(0.0, 0.0); len];
        for (i, a) in self.c.iter().take(len).enumerate() {
            for (j, b) in other.c.iter().take(len - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Self { lo: self.lo + other.lo, c }
    }

    pub fn invert(&self) -> Result<Self> {
        let a0 = self.c[0];
        if a0.norm() == 0.0 {
            return Err(Error::NonUnit("leading jet coefficient vanishes".into()));
        }
        let mut b = vec![Complex64::new(0.0, 0.0); self.c.len()];
        b[0] = a0.inv();
        for k in 1..self.c.len() {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 1..=k {
                s += self.c[i] * b[k - i];
            }
            b[k] = -s * b[0];
        }
        Ok(Self { lo: -self.lo, c: b })
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.invert()? } else { self.clone() };
        let mut acc = Self {
            lo: 0,
            c: {
                let mut v = vec![Complex64::new(0.0, 0.0); self.c.len()];
                v[0] = Complex64::new(1.0, 0.0);
                v
            },
        };
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

/// `D_{n,u}` for `n = 1..=order` at the pole `u = λτ + μ`, from Taylor jets of
/// every θ-factor in `x = 2πi(z - u)`.
pub fn laurent_numeric(
    quotient: &JacobiQuotient,
    pole: (Q, Q),
    order: u32,
    ctx: &EvalContext,
) -> Result<Vec<Complex64>> {
    let u = ctx.tau * to_f64(&pole.0) + to_f64(&pole.1);
    let len = order as usize + 3;
    let c = to_f64(&quotient.zeta_power());
    let head = e(u * c);
    let mut fact = 1.0;
    let mut coeffs = Vec::with_capacity(len);
    for k in 0..len {
        if k > 0 {
            fact *= k as f64;
        }
        coeffs.push(head * c.powi(k as i32) / fact);
    }
    let mut jet = ComplexJet { lo: 0, c: coeffs };
    for f in &quotient.factors {
        let point = u + ctx.tau * to_f64(&f.shift_tau) + to_f64(&f.shift_one);
        let vanishes = JacobiQuotient::factor_vanishes_at(f, pole);
        let first = usize::from(vanishes);
        let mut c = Vec::with_capacity(len);
        let mut fact = 1.0;
        for k in 0..first + len {
            if k > 0 {
                fact *= k as f64;
            }
            if k >= first {
                c.push(theta_d(point, k as u32, ctx)?.value / fact);
            }
        }
        let fj = ComplexJet { lo: first as i64, c };
        jet = jet.mul(&fj.pow(f.exponent)?);
    }
    Ok((1..=order as i64).map(|n| jet.coeff(-n)).collect())
}

/// Pole representatives of `quotient` inside `P_{z0}` as complex numbers with their orders.
pub fn poles_in(quotient: &JacobiQuotient, z0: (Q, Q), ctx: &EvalContext) -> Result<Vec<((Q, Q), Complex64, u32)>> {
    Ok(quotient
        .pole_inventory(z0)?
        .representatives
        .into_iter()
        .map(|(p, o)| (p, ctx.tau * to_f64(&p.0) + to_f64(&p.1), o))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::KacWakimotoSpec;
    use crate::rational::{q, qi};
    use crate::series::SeriesPrecision;
    use crate::special::theta::{eta_and_d, theta_series};

    fn ctx() -> EvalContext {
        EvalContext::new(Complex64::new(0.13, 1.04)).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn theta_is_odd_and_matches_exact_series() {
        let c = ctx();
        assert!(theta(Complex64::new(0.0, 0.0), &c).unwrap().value.norm() < 1e-14);
        let z = Complex64::new(0.21, 0.17);
        let exact = theta_series(SeriesPrecision::new(qi(30)).unwrap()).eval(c.tau, z);
        assert!(close(theta(z, &c).unwrap().value, exact, 1e-10));
    }

    #[test]
    fn eta_matches_product() {
        let c = ctx();
        let (eta_s, _) = eta_and_d(SeriesPrecision::new(qi(30)).unwrap());
        assert!(close(eta(&c).unwrap().value, eta_s.eval(c.tau, Complex64::new(0.0, 0.0)), 1e-12));
    }

    #[test]
    fn theta_derivative_against_finite_difference() {
        let c = ctx();
        let z = Complex64::new(0.3, -0.1);
        let h = 1e-5;
        let fd = (theta(z + h, &c).unwrap().value - theta(z - h, &c).unwrap().value) / (2.0 * h);
        let d = theta_d(z, 1, &c).unwrap().value * Complex64::new(0.0, TWO_PI);
        assert!(close(fd, d, 1e-7));
    }

    #[test]
    fn appell_derivative_against_finite_difference() {
        let c = ctx();
        let z = Complex64::new(0.37, 0.11);
        let u = Complex64::new(-0.12, 0.05);
        let h = 1e-5;
        let f = |u| appell_d(q(3, 2), 1, 0, z, u, &c).unwrap().value;
        let fd = (f(u + h) - f(u - h)) / (2.0 * h);
        let d = appell_d(q(3, 2), 1, 1, z, u, &c).unwrap().value * Complex64::new(0.0, TWO_PI);
        assert!(close(fd, d, 1e-6 * d.norm().max(1.0)));
    }

    #[test]
    fn appell_near_pole_is_rejected() {
        let c = ctx();
        let z = Complex64::new(0.2, 0.1);
        let err = appell_d(q(1, 2), 0, 0, z, z + 1e-12, &c).unwrap_err();
        assert!(matches!(err, Error::NearPole { .. }));
    }

    #[test]
    fn numeric_laurent_matches_exact() {
        let c = ctx();
        let spec = KacWakimotoSpec::new(0, 1).unwrap();
        let d = laurent_numeric(&spec.quotient(), (qi(0), qi(0)), 1, &c).unwrap();
        // D_{1,0}(φ_{0,1}) = -i η^{-3}
        let eta_v = eta(&c).unwrap().value;
        assert!(close(d[0], Complex64::new(0.0, -1.0) / eta_v.powi(3), 1e-10));
        let spec = KacWakimotoSpec::new(1, 3).unwrap();
        let d = laurent_numeric(&spec.quotient(), (qi(0), qi(0)), 3, &c).unwrap();
        let exact = crate::jets::laurent_coeffs(&spec.quotient(), 6, SeriesPrecision::new(qi(30)).unwrap()).unwrap();
        for n in 1..=3 {
            let ev = exact.get(n).eval(c.tau, Complex64::new(0.0, 0.0));
            assert!(close(d[n - 1], ev, 1e-9), "n = {n}");
        }
    }

    #[test]
    fn complex_jet_inverse() {
        let j =
            ComplexJet { lo: 1, c: vec![Complex64::new(2.0, 1.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 3.0)] };
        let one = j.mul(&j.invert().unwrap());
        assert_eq!(one.lo, 0);
        assert!(close(one.c[0], Complex64::new(1.0, 0.0), 1e-15));
        assert!(one.c[1..].iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn bad_tau_rejected() {
        assert!(EvalContext::new(Complex64::new(0.1, -1.0)).is_err());
    }
}
