//! Radial limits at rationals and cocycle probes for partial theta functions.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_integer::Integer;

use super::{e, e_real, eta, partial_theta_d, unilateral, EvalContext};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, to_f64, Q};
use crate::special::tails::chi12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialTarget {
    /// `θ⁺_{ℓ,ε,M}(λτ + μ; τ)`.
    PartialTheta {
        ell: Q,
        eps: u8,
        level: Q,
        lambda: Q,
        mu: Q,
    },
    Eta,
    /// `-½ Σ_{n≥1} n χ₁₂(n) q^{(n²-1)/24}`, whose radial limit at `h/k` is `F(e(h/k))`.
    KontsevichCompare,
}

impl RadialTarget {
    pub fn eval(&self, ctx: &EvalContext) -> Result<Complex64> {
        match *self {
            RadialTarget::PartialTheta { ell, eps, level, lambda, mu } => {
                let z = ctx.tau * to_f64(&lambda) + to_f64(&mu);
                Ok(partial_theta_d(ell, eps, level, 0, z, ctx)?.value)
            }
            RadialTarget::Eta => Ok(eta(ctx)?.value),
            RadialTarget::KontsevichCompare => {
                let tau = ctx.tau;
                let s = unilateral(ctx, |j| {
                    let n = j + 1;
                    let ex = e(tau * ((n * n - 1) as f64 / 24.0));
                    Ok((ex * (n * chi12(n)) as f64, n as f64 * ex.norm()))
                })?;
                Ok(s.value * -0.5)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialLimit {
    pub x: Q,
    pub ts: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Neville extrapolants to `t = 0` through the first `k+1` samples.
    pub extrapolants: Vec<Complex64>,
    pub extrapolant: Complex64,
    /// Difference of the last two extrapolants.
    pub stability: f64,
}

/// `t_j = t0 · 2^{-j}` for `j < levels`.
pub fn geometric_ts(t0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|j| t0 * 0.5f64.powi(j as i32)).collect()
}

fn check_ts(ts: &[f64]) -> Result<()> {
    if ts.len() < 2 || ts.iter().any(|t| !(*t > 0.0)) || ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("approach ts must be positive and strictly decreasing (at least two)".into()));
    }
    Ok(())
}

/// Value at `t = 0` of the interpolating polynomial through the first `k+1` points, for every `k`.
fn neville_at_zero(ts: &[f64], fs: &[Complex64]) -> Vec<Complex64> {
    let n = ts.len();
    let mut p: Vec<Complex64> = fs.to_vec();
    let mut diag = vec![fs[0]];
    // after round r, p[i] interpolates points i..=i+r
    for r in 1..n {
        for i in 0..n - r {
            let (ti, tj) = (ts[i], ts[i + r]);
            p[i] = (p[i + 1] * ti - p[i] * tj) / (ti - tj);
        }
        diag.push(p[0]);
    }
    diag
}

/// Limit of `target(x + it)` as `t → 0⁺` by Richardson extrapolation in `t`.
pub fn radial_limit(target: &RadialTarget, x: Q, ts: &[f64], cutoff: usize) -> Result<RadialLimit> {
    check_ts(ts)?;
    let xf = to_f64(&x);
    let values = ts
        .iter()
        .map(|&t| {
            let ctx = EvalContext::with(Complex64::new(xf, t), cutoff, 1e-13, 1e-12)?;
            target.eval(&ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    let extrapolants = neville_at_zero(ts, &values);
    let n = extrapolants.len();
    let extrapolant = extrapolants[n - 1];
    let stability = (extrapolants[n - 1] - extrapolants[n - 2]).norm();
    if !stability.is_finite() || stability > 1e-3 * extrapolant.norm().max(1.0) {
        return Err(Error::NonStable(stability));
    }
    Ok(RadialLimit { x, ts: ts.to_vec(), values, extrapolants, extrapolant, stability })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleProbe {
    /// `(a, b, c, d)` with `ad - bc = 1`.
    pub gamma: [i64; 4],
    pub weight_k: Q,
    /// Strictly increasing sample points.
    pub sample_xs: Vec<Q>,
    pub approach_ts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub x: Q,
    pub t: f64,
    pub value: Complex64,
    pub extrapolant: Complex64,
    pub diff1: Option<f64>,
    pub diff2: Option<f64>,
}

fn moebius(g: [i64; 4], x: Q) -> Option<Q> {
    let den = x * g[2] + g[3];
    (den != Q::from_integer(0)).then(|| (x * g[0] + g[1]) / den)
}

/// `r_γ(x) = f(x) - (cx+d)^{-k} f(γx)` sampled along `x + it` and extrapolated,
/// with first and second divided differences of `|r_γ|`-extrapolants across `x`.
/// Points where a radial limit is unstable are recorded as NaN.
pub fn cocycle_probe(probe: &CocycleProbe, f: &RadialTarget, cutoff: usize) -> Result<Vec<ProbeRow>> {
    let [a, b, c, d] = probe.gamma;
    if a * d - b * c != 1 {
        return Err(Error::Precondition("γ must have determinant 1".into()));
    }
    check_ts(&probe.approach_ts)?;
    if probe.sample_xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("sample xs must be strictly increasing".into()));
    }
    let k = to_f64(&probe.weight_k);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut per_x = Vec::new();
    for &x in &probe.sample_xs {
        let Some(gx) = moebius(probe.gamma, x) else {
            per_x.push((x, vec![nan; probe.approach_ts.len()], nan));
            continue;
        };
        let j = Complex64::new(to_f64(&(x * c + d)), 0.0).powf(-k);
        let lim = |y: Q| radial_limit(f, y, &probe.approach_ts, cutoff);
        let (values, ext) = match (lim(x), lim(gx)) {
            (Ok(l1), Ok(l2)) => {
                let vals = l1.values.iter().zip(&l2.values).map(|(u, v)| u - j * v).collect();
                (vals, l1.extrapolant - j * l2.extrapolant)
            }
            (Err(Error::NonStable(_)), _) | (_, Err(Error::NonStable(_))) => (vec![nan; probe.approach_ts.len()], nan),
            (Err(err), _) | (_, Err(err)) => return Err(err),
        };
        per_x.push((x, values, ext));
    }
    let xs: Vec<f64> = per_x.iter().map(|p| to_f64(&p.0)).collect();
    let rs: Vec<Complex64> = per_x.iter().map(|p| p.2).collect();
    let d1 = |i: usize| (rs[i + 1] - rs[i]).norm() / (xs[i + 1] - xs[i]);
    let mut rows = Vec::new();
    for (i, (x, values, ext)) in per_x.iter().enumerate() {
        let diff1 = (i + 1 < xs.len()).then(|| d1(i));
        let diff2 = (i >= 1 && i + 1 < xs.len()).then(|| {
            let left = (rs[i] - rs[i - 1]) / (xs[i] - xs[i - 1]);
            let right = (rs[i + 1] - rs[i]) / (xs[i + 1] - xs[i]);
            (right - left).norm() / ((xs[i + 1] - xs[i - 1]) / 2.0)
        });
        for (t, v) in probe.approach_ts.iter().zip(values) {
            rows.push(ProbeRow { x: *x, t: *t, value: *v, extrapolant: *ext, diff1, diff2 });
        }
    }
    Ok(rows)
}

fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table of probe rows with 17 significant digits.
pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut s = String::from("x,t,value_re,value_im,extrapolant_re,extrapolant_im,diff1,diff2\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map(f17).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_q(&r.x),
            f17(r.t),
            f17(r.value.re),
            f17(r.value.im),
            f17(r.extrapolant.re),
            f17(r.extrapolant.im),
            opt(r.diff1),
            opt(r.diff2)
        );
    }
    s
}

/// `θ⁺_{ℓ,ε,M}(λτ+μ; τ) = q^{q_power} e(phase) Σ_{n≥0} (-1)^{nε} e(twist·n) q^{M(n + a/b)²}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StandardForm {
    pub a_over_b: Q,
    pub q_power: Q,
    pub phase: Q,
    pub twist: Q,
    /// Sign parity absorbing the twist when `e(twist) = ±1`.
    pub eps_prime: Option<u8>,
    /// The series is standard in `τ' = tau_scale · τ`.
    pub tau_scale: Q,
    pub eps: u8,
}

pub fn reduce_partial_theta_standard(ell: Q, eps: u8, level: Q, z: (Q, Q)) -> StandardForm {
    let (lambda, mu) = z;
    let twist = level * 2 * mu;
    let twist = twist - Q::from_integer(twist.floor().to_integer());
    let eps_prime = (twist * 2).is_integer().then(|| ((eps as i64 + (twist * 2).to_integer()).mod_floor(&2)) as u8);
    StandardForm {
        a_over_b: lambda - ell / (level * 2),
        q_power: -level * lambda * lambda,
        phase: -ell * mu,
        twist,
        eps_prime,
        tau_scale: level,
        eps,
    }
}

impl StandardForm {
    pub fn eval(&self, ctx: &EvalContext) -> Result<Complex64> {
        let (ab, m, tw) = (to_f64(&self.a_over_b), to_f64(&self.tau_scale), to_f64(&self.twist));
        let tau = ctx.tau;
        let eps = self.eps;
        let s = unilateral(ctx, |n| {
            let sign = if eps == 1 && n % 2 == 1 { -1.0 } else { 1.0 };
            let x = n as f64 + ab;
            let ex = e(tau * (m * x * x));
            Ok((ex * e_real(tw * n as f64) * sign, ex.norm()))
        })?;
        Ok(e(tau * to_f64(&self.q_power)) * e_real(to_f64(&self.phase)) * s.value)
    }

    pub fn describe(&self) -> String {
        format!(
            "a/b={} q^{} e({}) twist=e({}n) eps'={} tau'={}tau",
            fmt_q(&self.a_over_b),
            fmt_q(&self.q_power),
            fmt_q(&self.phase),
            fmt_q(&self.twist),
            self.eps_prime.map(|e| e.to_string()).unwrap_or_else(|| "-".into()),
            fmt_q(&self.tau_scale)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::special::tails::kontsevich_at_root;

    #[test]
    fn eta_vanishes_radially() {
        let r = radial_limit(&RadialTarget::Eta, qi(0), &geometric_ts(0.02, 6), 1_000_000).unwrap();
        assert!(r.extrapolant.norm() < 1e-6, "{}", r.extrapolant);
    }

    #[test]
    fn partial_theta_limit_is_stable() {
        let t = RadialTarget::PartialTheta { ell: q(1, 2), eps: 1, level: q(1, 2), lambda: qi(0), mu: qi(0) };
        let r = radial_limit(&t, qi(1), &geometric_ts(0.02, 6), 1_000_000).unwrap();
        assert!(r.stability < 1e-5);
        // Abel sum of (-1)^n times e(1/8)
        assert!((r.extrapolant - e_real(0.125) * 0.5).norm() < 1e-5);
    }

    #[test]
    fn kontsevich_values_from_radial_limits() {
        for (h, k) in [(0i64, 1i64), (1, 2), (1, 4), (1, 3)] {
            // the asymptotic regime starts at t ~ 1/k²
            let ts = geometric_ts(0.01 / (k * k) as f64, 6);
            let r = radial_limit(&RadialTarget::KontsevichCompare, q(h, k), &ts, 1_000_000).unwrap();
            let exact = kontsevich_at_root(h, k).unwrap().to_complex();
            assert!((r.extrapolant - exact).norm() < 1e-6, "{h}/{k}: {} vs {exact}", r.extrapolant);
        }
    }

    #[test]
    fn reversed_ts_rejected() {
        let err = radial_limit(&RadialTarget::Eta, qi(0), &[0.01, 0.02], 1000).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn identity_cocycle_vanishes() {
        let f = RadialTarget::PartialTheta { ell: q(1, 2), eps: 1, level: q(1, 2), lambda: qi(0), mu: qi(0) };
        let probe = CocycleProbe {
            gamma: [1, 0, 0, 1],
            weight_k: q(1, 2),
            sample_xs: vec![q(1, 3), q(1, 2)],
            approach_ts: geometric_ts(0.02, 6),
        };
        let rows = cocycle_probe(&probe, &f, 1_000_000).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.value.norm() == 0.0 && r.extrapolant.norm() == 0.0));
        let csv = probe_csv(&rows);
        assert!(csv.starts_with("x,t,value_re,value_im,extrapolant_re,extrapolant_im,diff1,diff2\n"));
        assert_eq!(csv.lines().count(), 13);
    }

    #[test]
    fn standard_form_matches_direct_evaluation() {
        let cases = [
            (q(-1, 2), 0u8, q(1, 2), (qi(0), qi(0))),
            (q(1, 2), 1, q(3, 2), (q(1, 3), q(1, 4))),
            (qi(-1), 1, qi(1), (q(-1, 2), q(2, 3))),
        ];
        for (ell, eps, level, z) in cases {
            let sf = reduce_partial_theta_standard(ell, eps, level, z);
            for tau in [Complex64::new(0.1, 0.9), Complex64::new(-0.3, 1.2), Complex64::new(0.45, 0.7)] {
                let ctx = EvalContext::new(tau).unwrap();
                let zc = tau * to_f64(&z.0) + to_f64(&z.1);
                let direct = partial_theta_d(ell, eps, level, 0, zc, &ctx).unwrap().value;
                assert!((sf.eval(&ctx).unwrap() - direct).norm() < 1e-8);
            }
        }
        let sf = reduce_partial_theta_standard(q(-1, 2), 0, q(1, 2), (qi(0), qi(0)));
        assert_eq!((sf.a_over_b, sf.q_power, sf.phase, sf.eps_prime), (q(1, 2), qi(0), qi(0), Some(0)));
    }
}
