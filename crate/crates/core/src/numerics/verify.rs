//! Numeric checks of the decomposition and Fourier-coefficient formulas at general points.

use num_complex::Complex64;

use super::{
    appell_d, e, fourier_quadrature, laurent_numeric, partial_theta_d, phi, poles_in, EvalContext, QuadratureSpec,
};
use crate::error::{Error, Result};
use crate::quotient::JacobiQuotient;
use crate::rational::{fmt_q, to_f64, Q};
use crate::report::{Discrepancy, VerificationReport};

fn negative_level(quotient: &JacobiQuotient) -> Result<(Q, u8)> {
    let m = quotient.index();
    if m >= Q::from_integer(0) {
        return Err(Error::Precondition(format!("index {} is not negative", fmt_q(&m))));
    }
    Ok((-m, quotient.parity()?))
}

fn z0_complex(z0: (Q, Q), ctx: &EvalContext) -> Complex64 {
    ctx.tau * to_f64(&z0.0) + to_f64(&z0.1)
}

/// `-Σ_u Σ_n D_{n,u}/(n-1)! 𝒟_v^{n-1} F_{-m,ε}(z,v)|_{v=u}` over the poles in `P_{z0}`;
/// `skip_pole` drops one pole's contribution.
pub fn thm1_rhs_numeric(
    quotient: &JacobiQuotient,
    z: Complex64,
    z0: (Q, Q),
    ctx: &EvalContext,
    skip_pole: Option<usize>,
) -> Result<Complex64> {
    let (level, eps) = negative_level(quotient)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, (pole, u, order)) in poles_in(quotient, z0, ctx)?.into_iter().enumerate() {
        if skip_pole == Some(idx) {
            continue;
        }
        let d = laurent_numeric(quotient, pole, order, ctx)?;
        let mut fact = 1.0;
        for (n, dn) in d.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            acc += dn / fact * appell_d(level, eps, n as u32, z, u, ctx)?.value;
        }
    }
    Ok(-acc)
}

/// `Σ_u Σ_n D_{n,u}/(n-1)! 𝒟_z^{n-1} θ⁺_{ℓ,ε,-m}(u)` over the poles in `P_{z0}`.
pub fn thm2_rhs_numeric(quotient: &JacobiQuotient, ell: Q, z0: (Q, Q), ctx: &EvalContext) -> Result<Complex64> {
    let (level, eps) = negative_level(quotient)?;
    if !(ell - quotient.index()).is_integer() {
        return Err(Error::Precondition(format!("ℓ = {} is not in m + ℤ", fmt_q(&ell))));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (pole, u, order) in poles_in(quotient, z0, ctx)? {
        let d = laurent_numeric(quotient, pole, order, ctx)?;
        let mut fact = 1.0;
        for (n, dn) in d.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            acc += dn / fact * partial_theta_d(ell, eps, level, n as u32, u, ctx)?.value;
        }
    }
    Ok(acc)
}

fn tau_label(tau: Complex64) -> String {
    format!("{}{:+}i", tau.re, tau.im)
}

/// Compares `φ(z)` with the Appell–Lerch side at every `z` in `zs`.
pub fn verify_thm1_numeric(
    quotient: &JacobiQuotient,
    zs: &[Complex64],
    z0: (Q, Q),
    ctx: &EvalContext,
    tolerance: f64,
) -> Result<VerificationReport> {
    let id = format!("thm1-numeric/{}/tau={}", quotient.label(), tau_label(ctx.tau));
    let mut report = VerificationReport::numeric(id, tolerance)
        .with("z0", format!("{}t+{}", fmt_q(&z0.0), fmt_q(&z0.1)))
        .with("samples", zs.len())
        .with("poles", poles_in(quotient, z0, ctx)?.len());
    for &z in zs {
        let lhs = phi(quotient, z, ctx)?.value;
        let rhs = thm1_rhs_numeric(quotient, z, z0, ctx, None)?;
        if !((lhs - rhs).norm() < tolerance) {
            report = report.fail(Discrepancy::numeric(ctx.tau, z, lhs, rhs));
            break;
        }
    }
    Ok(report)
}

/// Compares the quadrature `h_{ℓ,z0}` with the partial-theta side.
pub fn verify_thm2_numeric(
    quotient: &JacobiQuotient,
    ell: Q,
    z0: (Q, Q),
    ctx: &EvalContext,
    tolerance: f64,
) -> Result<VerificationReport> {
    let rhs = thm2_rhs_numeric(quotient, ell, z0, ctx)?;
    let zc = z0_complex(z0, ctx);
    let quad = fourier_quadrature(quotient, &QuadratureSpec::new(zc, ell), ctx)?;
    let id = format!("thm2-numeric/{}/ell={}/tau={}", quotient.label(), fmt_q(&ell), tau_label(ctx.tau));
    let report = VerificationReport::numeric(id, tolerance)
        .with("z0", format!("{}t+{}", fmt_q(&z0.0), fmt_q(&z0.1)))
        .with("quadrature_points", quad.n_points);
    Ok(if (quad.value - rhs).norm() < tolerance {
        report
    } else {
        report.fail(Discrepancy::numeric(ctx.tau, zc, quad.value, rhs))
    })
}

/// `∮_{|u-z|=r} F_{M,ε}(z,u) du` on `n` equally spaced nodes.
fn contour(level: Q, eps: u8, z: Complex64, r: f64, n: usize, ctx: &EvalContext) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let w = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
        acc += appell_d(level, eps, 0, z, z + w, ctx)?.value * w * Complex64::new(0.0, 1.0);
    }
    Ok(acc * (2.0 * std::f64::consts::PI / n as f64))
}

/// Residue of `F_{M,ε}(z,·)` at `u = z` by contour integration (radius `r` and `r/2`)
/// and the elliptic law in `u` for `(λ,μ) ∈ {-1,0,1}×{0,1}`.
///
/// The law is compared relative to `max(1, |rhs|)`, since `e(-M(λ²τ+2λu))` can be large.
pub fn residue_and_elliptic_check(
    level: Q,
    eps: u8,
    ctx: &EvalContext,
    samples: &[(Complex64, Complex64)],
    residue_tol: f64,
    law_tol: f64,
) -> Result<VerificationReport> {
    let id = format!("lemma31/M={},eps={}/tau={}", fmt_q(&level), eps, tau_label(ctx.tau));
    let report = VerificationReport::numeric(id, law_tol)
        .with("residue_tolerance", format!("{residue_tol:e}"))
        .with("samples", samples.len());
    let m = to_f64(&level);
    let r0 = 0.05 * ctx.tau.im.min(1.0);
    for &(z, u) in samples {
        for r in [r0, r0 / 2.0] {
            let c = contour(level, eps, z, r, 64, ctx)?;
            let one = Complex64::new(1.0, 0.0);
            if !((c - one).norm() < residue_tol) {
                return Ok(report.fail(Discrepancy::numeric(ctx.tau, z, c, one)));
            }
        }
        let base = appell_d(level, eps, 0, z, u, ctx)?.value;
        for lam in -1i64..=1 {
            for mu in 0i64..=1 {
                let shifted = u + ctx.tau * lam as f64 + mu as f64;
                let lhs = appell_d(level, eps, 0, z, shifted, ctx)?.value;
                let sign_exp = (level * 2 * mu).to_integer() + lam * eps as i64;
                let sign = if sign_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let lf = lam as f64;
                let rhs = base * e(-(ctx.tau * (lf * lf) + u * (2.0 * lf)) * m) * sign;
                if !((lhs - rhs).norm() / rhs.norm().max(1.0) < law_tol) {
                    return Ok(report.fail(Discrepancy::numeric(ctx.tau, shifted, lhs, rhs)));
                }
            }
        }
    }
    Ok(report)
}
