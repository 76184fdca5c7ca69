//! Fourier coefficients `h_{ℓ,z0} = q^{-ℓ²/4m} ∫_{z0}^{z0+1} φ(z) e(-ℓz) dz` by the trapezoidal rule.

use num_complex::Complex64;

use super::{e, laurent_numeric, phi, EvalContext};
use crate::error::{Error, Result};
use crate::quotient::JacobiQuotient;
use crate::rational::{fmt_q, to_f64, Q};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub z0: Complex64,
    pub ell: Q,
    /// Starting number of nodes; doubled until the value is stable.
    pub n_points: usize,
    pub deform_delta: f64,
}

impl QuadratureSpec {
    pub fn new(z0: Complex64, ell: Q) -> Self {
        Self { z0, ell, n_points: 16, deform_delta: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Nodes used by the accepted estimate.
    pub n_points: usize,
    /// `|h(n/2) - h(n)|` at acceptance.
    pub last_change: f64,
    /// Whether a pole on the path forced the ±iδ average.
    pub deformed: bool,
}

const MAX_POINTS: usize = 1 << 17;

fn check_ell(quotient: &JacobiQuotient, ell: Q) -> Result<Q> {
    let m = quotient.index();
    if m == Q::from_integer(0) {
        return Err(Error::Precondition("index 0 has no q^{-ℓ²/4m} normalization".into()));
    }
    if !(ell - m).is_integer() {
        return Err(Error::Precondition(format!(
            "ℓ = {} is not in m + ℤ with m = {}; the integrand is not 1-periodic",
            fmt_q(&ell),
            fmt_q(&m)
        )));
    }
    Ok(m)
}

/// Real parts (mod 1) of the poles lying on the horizontal line through `z0`.
fn poles_on_line(quotient: &JacobiQuotient, z0: Complex64, ctx: &EvalContext) -> Vec<(Q, Q, f64)> {
    let y = ctx.tau.im;
    quotient
        .pole_classes()
        .into_iter()
        .filter_map(|((lam, mu), _)| {
            let shift = z0.im / y - to_f64(&lam);
            let k = shift.round();
            ((shift - k).abs() < 1e-12).then(|| {
                let p = ctx.tau * (to_f64(&lam) + k) + to_f64(&mu);
                (lam, mu, p.re)
            })
        })
        .collect()
}

/// Stable trapezoidal average of `g` over `start + [0,1)`.
fn periodic_mean(
    start: Complex64,
    n0: usize,
    ctx: &EvalContext,
    g: &impl Fn(Complex64) -> Result<Complex64>,
) -> Result<(Complex64, usize, f64)> {
    let mut n = n0;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n {
        sum += g(start + j as f64 / n as f64)?;
    }
    let mut h = sum / n as f64;
    loop {
        if n >= MAX_POINTS {
            return Err(Error::NonConvergent(n as f64));
        }
        let mut mid = Complex64::new(0.0, 0.0);
        for j in 0..n {
            mid += g(start + (j as f64 + 0.5) / n as f64)?;
        }
        sum += mid;
        n *= 2;
        let next = sum / n as f64;
        let change = (next - h).norm();
        h = next;
        if change <= ctx.eps * h.norm().max(1.0) {
            return Ok((h, n, change));
        }
    }
}

pub fn fourier_quadrature(
    quotient: &JacobiQuotient,
    spec: &QuadratureSpec,
    ctx: &EvalContext,
) -> Result<QuadratureResult> {
    if spec.n_points < 16 || !spec.n_points.is_power_of_two() {
        return Err(Error::Precondition(format!("n_points must be a power of two ≥ 16, got {}", spec.n_points)));
    }
    if !(spec.deform_delta > 0.0) {
        return Err(Error::Precondition("deform_delta must be positive".into()));
    }
    let m = check_ell(quotient, spec.ell)?;
    let ell = to_f64(&spec.ell);
    let g = |z: Complex64| -> Result<Complex64> { Ok(phi(quotient, z, ctx)?.value * e(-z * ell)) };
    let on_line = poles_on_line(quotient, spec.z0, ctx);
    let mut start = spec.z0;
    if on_line.iter().any(|p| ((start.re - p.2) - (start.re - p.2).round()).abs() < 1e-12) {
        start -= spec.deform_delta;
    }
    let (h, n, change, deformed) = if on_line.is_empty() {
        let (h, n, c) = periodic_mean(start, spec.n_points, ctx, &g)?;
        (h, n, c, false)
    } else {
        let up = Complex64::new(0.0, spec.deform_delta);
        let (a, na, ca) = periodic_mean(start + up, spec.n_points, ctx, &g)?;
        let (b, nb, cb) = periodic_mean(start - up, spec.n_points, ctx, &g)?;
        ((a + b) / 2.0, na.max(nb), ca.max(cb), true)
    };
    let pre = e(ctx.tau * (-ell * ell / (4.0 * to_f64(&m))));
    Ok(QuadratureResult { value: pre * h, n_points: n, last_change: change * pre.norm(), deformed })
}

/// Principal value of the Fourier integral along a line through simple poles:
/// each pole's `r·π·cot(π(z-p))` is subtracted (it integrates to zero) and the
/// smooth remainder is integrated on nodes avoiding the poles.
pub fn principal_value_line(quotient: &JacobiQuotient, z0: Complex64, ell: Q, ctx: &EvalContext) -> Result<Complex64> {
    let m = check_ell(quotient, ell)?;
    let l = to_f64(&ell);
    let mut singular = Vec::new();
    for (lam, mu, re) in poles_on_line(quotient, z0, ctx) {
        let order = quotient.pole_classes().into_iter().find(|(p, _)| *p == (lam, mu)).map(|(_, o)| o).unwrap_or(0);
        if order != 1 {
            return Err(Error::Precondition("principal values need simple poles".into()));
        }
        let d1 = laurent_numeric(quotient, (lam, mu), 1, ctx)?[0];
        let u = Complex64::new(re, z0.im);
        let residue = d1 * e(-u * l) / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        singular.push((u, residue));
    }
    if singular.is_empty() {
        return Err(Error::Precondition("no pole on the line".into()));
    }
    let pi = std::f64::consts::PI;
    let g = |z: Complex64| -> Result<Complex64> {
        let mut v = phi(quotient, z, ctx)?.value * e(-z * l);
        for (u, r) in &singular {
            let w = (z - u) * pi;
            v -= r * pi * w.cos() / w.sin();
        }
        Ok(v)
    };
    // nodes offset by half a step from the first pole
    let (h, _, _) = periodic_mean(singular[0].0 + 1.0 / 64.0 / 2.0 + 1e-3, 32, ctx, &g)?;
    Ok(e(ctx.tau * (-l * l / (4.0 * to_f64(&m)))) * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{theta_squared_slices, thm2_rhs_exact, two_pole_quotient};
    use crate::quotient::{KacWakimotoSpec, ThetaFactor};
    use crate::rational::{q, qi};
    use crate::series::SeriesPrecision;

    fn ctx() -> EvalContext {
        EvalContext::new(Complex64::new(0.13, 1.04)).unwrap()
    }

    #[test]
    fn theta_squared_slices_by_quadrature() {
        let c = ctx();
        let sq = JacobiQuotient::new(vec![ThetaFactor::new(qi(0), qi(0), 2)]);
        let (_, h) = theta_squared_slices(SeriesPrecision::new(qi(30)).unwrap()).unwrap();
        for l in [0i64, 1] {
            let r = fourier_quadrature(&sq, &QuadratureSpec::new(Complex64::new(0.0, 0.0), qi(l)), &c).unwrap();
            let exact = h[l as usize].eval(c.tau, Complex64::new(0.0, 0.0));
            assert!((r.value - exact).norm() < 1e-10, "ℓ = {l}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn crank_kernel_coefficient_matches_exact_pipeline() {
        let c = ctx();
        let spec = KacWakimotoSpec::new(0, 1).unwrap();
        let z0 = c.tau * -0.5 - 0.5;
        let r = fourier_quadrature(&spec.quotient(), &QuadratureSpec::new(z0, q(-1, 2)), &c).unwrap();
        let exact = thm2_rhs_exact(spec, q(-1, 2), SeriesPrecision::new(qi(30)).unwrap()).unwrap();
        let ev = exact.eval(c.tau, Complex64::new(0.0, 0.0));
        assert!((r.value - ev).norm() < 1e-8, "{} vs {ev}", r.value);
    }

    #[test]
    fn integrand_is_periodic() {
        let c = ctx();
        let quo = KacWakimotoSpec::new(1, 3).unwrap().quotient();
        let z0 = c.tau * -0.5 - 0.5;
        let g = |z: Complex64| phi(&quo, z, &c).unwrap().value * e(-z * 1.0);
        assert!((g(z0) - g(z0 + 1.0)).norm() < 1e-12);
    }

    #[test]
    fn off_lattice_ell_is_rejected() {
        let c = ctx();
        let quo = KacWakimotoSpec::new(0, 1).unwrap().quotient();
        let err = fourier_quadrature(&quo, &QuadratureSpec::new(Complex64::new(0.0, -0.3), qi(0)), &c).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn averaged_deformation_is_the_principal_value() {
        let c = ctx();
        for quo in [KacWakimotoSpec::new(0, 1).unwrap().quotient(), two_pole_quotient()] {
            let ell = if quo.index() == q(-1, 2) { q(1, 2) } else { qi(0) };
            let z0 = Complex64::new(-0.3, 0.0);
            let avg = fourier_quadrature(&quo, &QuadratureSpec::new(z0, ell), &c).unwrap();
            assert!(avg.deformed);
            let pv = principal_value_line(&quo, z0, ell, &c).unwrap();
            assert!((avg.value - pv).norm() < 1e-6, "{} vs {pv}", avg.value);
            let mut narrow = QuadratureSpec::new(z0, ell);
            narrow.deform_delta = 0.02;
            let avg2 = fourier_quadrature(&quo, &narrow, &c).unwrap();
            assert!((avg.value - avg2.value).norm() < 1e-8);
        }
    }

    #[test]
    fn endpoint_pole_shifts_the_window() {
        let c = ctx();
        let quo = KacWakimotoSpec::new(0, 1).unwrap().quotient();
        let at_pole = fourier_quadrature(&quo, &QuadratureSpec::new(Complex64::new(0.0, 0.0), q(1, 2)), &c).unwrap();
        let inner = fourier_quadrature(&quo, &QuadratureSpec::new(Complex64::new(-0.4, 0.0), q(1, 2)), &c).unwrap();
        assert!((at_pole.value - inner.value).norm() < 1e-8);
    }

    #[test]
    fn doubling_shrinks_geometrically() {
        let c = ctx();
        let quo = KacWakimotoSpec::new(0, 2).unwrap().quotient();
        let z0 = c.tau * -0.5 - 0.5;
        let g = |z: Complex64| -> Result<Complex64> { Ok(phi(&quo, z, &c)?.value * e(-z * 1.0)) };
        let est = |n: usize| (0..n).map(|j| g(z0 + j as f64 / n as f64).unwrap()).sum::<Complex64>() / n as f64;
        let exact = est(256);
        let errs: Vec<f64> = [4usize, 8, 16].iter().map(|&n| (est(n) - exact).norm()).collect();
        assert!(errs[1] < errs[0] * 0.2 && errs[2] < errs[1] * 0.2, "{errs:?}");
    }
}
