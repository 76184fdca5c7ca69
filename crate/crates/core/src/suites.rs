//! Named verification suites.
//!
//! A suite expands into independent cases that run on the current rayon pool;
//! results are collected in case order, so output does not depend on the
//! thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decomposition::{
    eq32_check, eq33_check, rank_crank_check, sum_of_tails_check, theta_decomp_check, theta_squared_slices,
    triple_product_check, two_pole_quotient, verify_cor12, verify_cor12_mutated, Mutation,
};
use crate::error::{Error, Result};
use crate::numerics::quantum::geometric_ts;
use crate::numerics::{
    fourier_quadrature, radial_limit, reduce_partial_theta_standard, residue_and_elliptic_check, verify_thm1_numeric,
    verify_thm2_numeric, EvalContext, QuadratureSpec, RadialTarget,
};
use crate::quotient::{JacobiQuotient, KacWakimotoSpec, ThetaFactor};
use crate::rational::{fmt_q, q, qi, to_f64, Q};
use crate::report::{Discrepancy, VerificationReport};
use crate::series::SeriesPrecision;
use crate::special::tails::{kontsevich_at_root, KontsevichValue};

pub const SUITES: [&str; 10] = [
    "cor12",
    "thm1-numeric",
    "thm2-numeric",
    "lemma31",
    "eq32",
    "eq33",
    "theta-decomp",
    "sum-of-tails",
    "rank-crank",
    "quantum",
];

/// The six Kac–Wakimoto characters used throughout.
pub const KW_GRID: [(u32, u32); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub const DEFAULT_TAUS: [(f64, f64); 3] = [(0.13, 1.04), (-0.21, 0.8), (0.5, 1.5)];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteParams {
    /// Exact suites check below `q^precision`; `None` uses each suite's default.
    pub precision: Option<Q>,
    pub taus: Vec<Complex64>,
    pub mn: Option<KacWakimotoSpec>,
    pub ell: Option<Q>,
    pub z0: Option<(Q, Q)>,
    pub tolerance: Option<f64>,
    pub seed: u64,
    /// Also run corrupted inputs and report whether each was caught.
    pub mutants: bool,
    /// Record per-case wall time in `wall_ms`.
    pub timing: bool,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            precision: None,
            taus: DEFAULT_TAUS.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
            mn: None,
            ell: None,
            z0: None,
            tolerance: None,
            seed: 0,
            mutants: false,
            timing: false,
        }
    }
}

impl SuiteParams {
    fn prec(&self, default: i64) -> Result<SeriesPrecision> {
        SeriesPrecision::new(self.precision.unwrap_or(qi(default)))
    }

    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    fn specs(&self) -> Vec<KacWakimotoSpec> {
        match self.mn {
            Some(s) => vec![s],
            None => KW_GRID.iter().map(|&(m, n)| KacWakimotoSpec::new(m, n).expect("grid is valid")).collect(),
        }
    }
}

/// One independent unit of work.
#[derive(Clone, Debug)]
enum Case {
    Cor12(KacWakimotoSpec),
    Cor12Mutant(KacWakimotoSpec, Mutation),
    Thm1 { quotient: JacobiQuotient, z0: (Q, Q), tau: Complex64, index: u64 },
    Thm2 { quotient: JacobiQuotient, ell: Q, z0: (Q, Q), tau: Complex64 },
    Lemma31 { level: Q, eps: u8, tau: Complex64, index: u64 },
    Eq32 { level: Q, eps: u8, ell: Q, lambda: i64, mu: i64 },
    Eq33 { level: Q, eps: u8, ell: Q },
    TripleProduct,
    ThetaDecomp,
    ThetaSliceQuadrature(Complex64),
    SumOfTails,
    RankCrank,
    KontsevichExact,
    EtaRadial,
    PartialThetaRadial,
    KontsevichRadial(i64, i64),
    StandardForm { ell: Q, eps: u8, level: Q, z: (Q, Q) },
}

fn kw_z0() -> (Q, Q) {
    (q(-1, 2), q(-1, 2))
}

fn ell_values(m: Q, fixed: Option<Q>) -> Vec<Q> {
    match fixed {
        Some(l) => vec![l],
        None => (-1..=1).map(|k| m + qi(k)).collect(),
    }
}

fn half_levels() -> [Q; 3] {
    [q(1, 2), qi(1), q(3, 2)]
}

fn cases(name: &str, p: &SuiteParams) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    match name {
        "cor12" => {
            for s in p.specs() {
                out.push(Case::Cor12(s));
                if p.mutants {
                    out.push(Case::Cor12Mutant(s, Mutation::PerturbD { n: s.n as usize, delta: 1 }));
                    out.push(Case::Cor12Mutant(s, Mutation::FlipEps));
                    out.push(Case::Cor12Mutant(s, Mutation::FlipAppellSign { k: 0 }));
                }
            }
        }
        "thm1-numeric" => {
            let mut idx = 0;
            let mut quotients: Vec<(JacobiQuotient, (Q, Q))> =
                p.specs().into_iter().map(|s| (s.quotient(), p.z0.unwrap_or_else(kw_z0))).collect();
            if p.mn.is_none() {
                quotients.push((two_pole_quotient(), p.z0.unwrap_or((q(-3, 4), q(-3, 4)))));
                if p.z0.is_none() {
                    quotients.push((two_pole_quotient(), (q(-1, 4), q(-1, 4))));
                }
            }
            for (quotient, z0) in quotients {
                for &tau in &p.taus {
                    out.push(Case::Thm1 { quotient: quotient.clone(), z0, tau, index: idx });
                    idx += 1;
                }
            }
        }
        "thm2-numeric" => {
            for s in p.specs() {
                for ell in ell_values(s.index(), p.ell) {
                    for &tau in &p.taus {
                        out.push(Case::Thm2 { quotient: s.quotient(), ell, z0: p.z0.unwrap_or_else(kw_z0), tau });
                    }
                }
            }
        }
        "lemma31" => {
            let mut idx = 0;
            for level in half_levels() {
                for eps in 0..=1 {
                    for &tau in &p.taus {
                        out.push(Case::Lemma31 { level, eps, tau, index: idx });
                        idx += 1;
                    }
                }
            }
        }
        "eq32" | "eq33" => {
            for level in half_levels() {
                for eps in 0..=1 {
                    for ell in ell_values(level, p.ell) {
                        if name == "eq33" {
                            out.push(Case::Eq33 { level, eps, ell });
                            continue;
                        }
                        for lambda in -1..=1 {
                            for mu in 0..=1 {
                                out.push(Case::Eq32 { level, eps, ell, lambda, mu });
                            }
                        }
                    }
                }
            }
        }
        "theta-decomp" => {
            out.push(Case::TripleProduct);
            out.push(Case::ThetaDecomp);
            out.extend(p.taus.iter().map(|&t| Case::ThetaSliceQuadrature(t)));
        }
        "sum-of-tails" => out.push(Case::SumOfTails),
        "rank-crank" => out.push(Case::RankCrank),
        "quantum" => {
            out.push(Case::KontsevichExact);
            out.push(Case::EtaRadial);
            out.push(Case::PartialThetaRadial);
            for (h, k) in [(0, 1), (1, 2), (1, 4), (1, 3)] {
                out.push(Case::KontsevichRadial(h, k));
            }
            out.push(Case::StandardForm { ell: q(-1, 2), eps: 0, level: q(1, 2), z: (qi(0), qi(0)) });
            out.push(Case::StandardForm { ell: q(1, 2), eps: 1, level: q(3, 2), z: (q(1, 3), q(1, 4)) });
        }
        other => {
            return Err(Error::Precondition(format!("unknown suite '{other}'; known: {}", SUITES.join(", "))));
        }
    }
    Ok(out)
}

fn tau_label(tau: Complex64) -> String {
    format!("{}{:+}i", tau.re, tau.im)
}

/// Random points `z = a + bτ` kept away from every pole class of `quotient` (mod `ℤτ + ℤ`).
pub fn sample_points(quotient: &JacobiQuotient, tau: Complex64, count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poles: Vec<(f64, f64)> = quotient.pole_classes().iter().map(|((l, m), _)| (to_f64(l), to_f64(m))).collect();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a: f64 = rng.gen_range(0.0..1.0);
        let b: f64 = rng.gen_range(-0.45..0.45);
        let near = poles.iter().any(|&(pl, pm)| {
            let db = b - pl - (b - pl).round();
            let da = a - pm - (a - pm).round();
            db.hypot(da) < 0.08
        });
        if !near {
            out.push(tau * b + a);
        }
    }
    out
}

fn error_report(id: String, err: &Error) -> VerificationReport {
    let mut r = VerificationReport::new(id, qi(0)).with("error", format!("{err:?}"));
    r.status = crate::report::Status::Fail;
    r
}

fn run_case(case: &Case, p: &SuiteParams) -> Result<Vec<VerificationReport>> {
    let one = |r: VerificationReport| Ok(vec![r]);
    match case {
        Case::Cor12(s) => one(verify_cor12(*s, p.prec(25)?)?),
        Case::Cor12Mutant(s, m) => {
            let r = verify_cor12_mutated(*s, p.prec(25)?, *m)?;
            let caught = !r.passed();
            let mut out = VerificationReport::new(format!("{}/caught", r.id), qi(0)).with("mutant_fails", caught);
            if let Some(d) = &r.first_discrepancy {
                out = out.with("first_difference", format!("q^{} zeta^{}", d.q, d.z));
            }
            out.checked_to = r.checked_to;
            if !caught {
                out.status = crate::report::Status::Fail;
            }
            one(out)
        }
        Case::Thm1 { quotient, z0, tau, index } => {
            let ctx = EvalContext::new(*tau)?;
            let zs = sample_points(quotient, *tau, 5, p.seed.wrapping_mul(1_000_003).wrapping_add(*index));
            let mut r = verify_thm1_numeric(quotient, &zs, *z0, &ctx, p.tol(1e-8))?;
            r.id = format!("{}/z0={}t+{}", r.id, fmt_q(&z0.0), fmt_q(&z0.1));
            one(r)
        }
        Case::Thm2 { quotient, ell, z0, tau } => {
            let ctx = EvalContext::new(*tau)?;
            one(verify_thm2_numeric(quotient, *ell, *z0, &ctx, p.tol(1e-7))?)
        }
        Case::Lemma31 { level, eps, tau, index } => {
            let ctx = EvalContext::new(*tau)?;
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_mul(7_919).wrapping_add(*index));
            let samples: Vec<(Complex64, Complex64)> = (0..3)
                .map(|_| {
                    let z = *tau * rng.gen_range(-0.3..0.3) + rng.gen_range(0.0..1.0);
                    // keep u off z + ℤτ + ℤ
                    let u = z + *tau * rng.gen_range(0.2..0.4) + rng.gen_range(0.2..0.8);
                    (z, u)
                })
                .collect();
            one(residue_and_elliptic_check(*level, *eps, &ctx, &samples, 1e-7, p.tol(1e-8))?)
        }
        Case::Eq32 { level, eps, ell, lambda, mu } => one(eq32_check(*level, *eps, *ell, *lambda, *mu, p.prec(40)?)?),
        Case::Eq33 { level, eps, ell } => one(eq33_check(*level, *eps, *ell, p.prec(40)?)?),
        Case::TripleProduct => one(triple_product_check(p.prec(50)?)?),
        Case::ThetaDecomp => one(theta_decomp_check(p.prec(30)?)?),
        Case::ThetaSliceQuadrature(tau) => {
            let ctx = EvalContext::new(*tau)?;
            let tol = p.tol(1e-10);
            let sq = JacobiQuotient::new(vec![ThetaFactor::new(qi(0), qi(0), 2)]);
            let (_, h) = theta_squared_slices(SeriesPrecision::new(qi(30))?)?;
            let mut r = VerificationReport::numeric(format!("theta-decomp/quadrature/tau={}", tau_label(*tau)), tol);
            for (l, hl) in h.iter().enumerate() {
                let quad = fourier_quadrature(&sq, &QuadratureSpec::new(Complex64::new(0.0, 0.0), qi(l as i64)), &ctx)?;
                let exact = hl.eval(*tau, Complex64::new(0.0, 0.0));
                if !((quad.value - exact).norm() < tol) {
                    r = r.fail(Discrepancy::numeric(*tau, Complex64::new(l as f64, 0.0), quad.value, exact));
                    break;
                }
            }
            one(r)
        }
        Case::SumOfTails => one(sum_of_tails_check(p.prec(30)?)?),
        Case::RankCrank => Ok(vec![rank_crank_check(p.prec(20)?, 40)?.0]),
        Case::KontsevichExact => {
            let mut r = VerificationReport::new("quantum/kontsevich-exact", qi(0));
            let expect = [((0, 1), (1, 0)), ((1, 2), (3, 0)), ((1, 4), (8, -3))];
            for ((h, k), (re, im)) in expect {
                let v = kontsevich_at_root(h, k)?;
                let want = crate::gaussian::GQ::from_int(re) + crate::gaussian::GQ::i().scale_int(im);
                r = r.with(
                    &format!("F(e({h}/{k}))"),
                    match &v {
                        KontsevichValue::Exact(g) => g.to_string(),
                        KontsevichValue::Approx(c) => format!("{c}"),
                    },
                );
                if v != KontsevichValue::Exact(want.clone()) {
                    r = r.compare(Some((q(h, k), qi(0), want, crate::gaussian::GQ::zero())));
                }
            }
            one(r)
        }
        Case::EtaRadial => {
            let lim = radial_limit(&RadialTarget::Eta, qi(0), &geometric_ts(0.02, 6), 1_000_000)?;
            let tol = 1e-6;
            let r = VerificationReport::numeric("quantum/eta-radial/x=0", tol)
                .with("t0", 0.02)
                .with("levels", 6)
                .with("extrapolant_abs", format!("{:.3e}", lim.extrapolant.norm()));
            one(if lim.extrapolant.norm() < tol {
                r
            } else {
                r.fail(Discrepancy::numeric(
                    Complex64::new(0.0, 0.02),
                    Complex64::default(),
                    lim.extrapolant,
                    Complex64::default(),
                ))
            })
        }
        Case::PartialThetaRadial => {
            let t = RadialTarget::PartialTheta { ell: q(1, 2), eps: 1, level: q(1, 2), lambda: qi(0), mu: qi(0) };
            let tol = 1e-5;
            let r = VerificationReport::numeric("quantum/partial-theta-radial/x=1", tol);
            one(match radial_limit(&t, qi(1), &geometric_ts(0.02, 6), 1_000_000) {
                Ok(lim) if lim.stability < tol => r
                    .with("limit", crate::report::fmt_complex(lim.extrapolant))
                    .with("stability", format!("{:.3e}", lim.stability)),
                Ok(lim) => r.fail(Discrepancy::numeric(
                    Complex64::new(1.0, 0.0),
                    Complex64::default(),
                    lim.extrapolants[4],
                    lim.extrapolant,
                )),
                Err(e) => error_report("quantum/partial-theta-radial/x=1".into(), &e),
            })
        }
        Case::KontsevichRadial(h, k) => {
            let tol = 1e-6;
            // radial asymptotics set in at t ~ 1/k²
            let ts = geometric_ts(0.01 / (k * k) as f64, 6);
            let lim = radial_limit(&RadialTarget::KontsevichCompare, q(*h, *k), &ts, 1_000_000)?;
            let exact = kontsevich_at_root(*h, *k)?.to_complex();
            let r = VerificationReport::numeric(format!("quantum/kontsevich-radial/x={}", fmt_q(&q(*h, *k))), tol);
            one(if (lim.extrapolant - exact).norm() < tol {
                r
            } else {
                r.fail(Discrepancy::numeric(
                    Complex64::new(to_f64(&q(*h, *k)), 0.0),
                    Complex64::default(),
                    lim.extrapolant,
                    exact,
                ))
            })
        }
        Case::StandardForm { ell, eps, level, z } => {
            let sf = reduce_partial_theta_standard(*ell, *eps, *level, *z);
            let tol = p.tol(1e-8);
            let mut r = VerificationReport::numeric(
                format!(
                    "quantum/standard-form/M={},eps={},ell={},z={}t+{}",
                    fmt_q(level),
                    eps,
                    fmt_q(ell),
                    fmt_q(&z.0),
                    fmt_q(&z.1)
                ),
                tol,
            )
            .with("form", sf.describe());
            for tau in [Complex64::new(0.1, 0.9), Complex64::new(-0.3, 1.2), Complex64::new(0.45, 0.7)] {
                let ctx = EvalContext::new(tau)?;
                let zc = tau * to_f64(&z.0) + to_f64(&z.1);
                let direct = crate::numerics::partial_theta_d(*ell, *eps, *level, 0, zc, &ctx)?.value;
                let std = sf.eval(&ctx)?;
                if !((std - direct).norm() < tol) {
                    r = r.fail(Discrepancy::numeric(tau, zc, direct, std));
                    break;
                }
            }
            one(r)
        }
    }
}

fn case_id(case: &Case) -> String {
    match case {
        Case::Cor12(s) => format!("M={},N={}", s.m, s.n),
        Case::Cor12Mutant(s, m) => format!("M={},N={}/mutant={}", s.m, s.n, m.label()),
        Case::Thm1 { quotient, z0, tau, .. } => {
            format!("{}/tau={}/z0={}t+{}", quotient.label(), tau_label(*tau), fmt_q(&z0.0), fmt_q(&z0.1))
        }
        Case::Thm2 { quotient, ell, tau, .. } => {
            format!("{}/ell={}/tau={}", quotient.label(), fmt_q(ell), tau_label(*tau))
        }
        Case::Lemma31 { level, eps, tau, .. } => format!("M={},eps={}/tau={}", fmt_q(level), eps, tau_label(*tau)),
        Case::Eq32 { level, eps, ell, lambda, mu } => {
            format!("M={},eps={},ell={}/lambda={lambda},mu={mu}", fmt_q(level), eps, fmt_q(ell))
        }
        Case::Eq33 { level, eps, ell } => {
            format!("M={},eps={},ell={}", fmt_q(level), eps, fmt_q(ell))
        }
        Case::TripleProduct => "triple-product".into(),
        Case::ThetaDecomp => "reassembly".into(),
        Case::ThetaSliceQuadrature(tau) => format!("quadrature/tau={}", tau_label(*tau)),
        Case::SumOfTails => "fit".into(),
        Case::RankCrank => "fit".into(),
        Case::KontsevichExact => "kontsevich-exact".into(),
        Case::EtaRadial => "eta-radial".into(),
        Case::PartialThetaRadial => "partial-theta-radial".into(),
        Case::KontsevichRadial(h, k) => format!("kontsevich-radial/x={h}/{k}"),
        Case::StandardForm { ell, eps, level, z } => {
            format!(
                "standard-form/M={},eps={},ell={}/z={}t+{}",
                fmt_q(level),
                eps,
                fmt_q(ell),
                fmt_q(&z.0),
                fmt_q(&z.1)
            )
        }
    }
}

/// Runs every case of suite `name` on the current rayon pool.
///
/// Contract violations surface as `Err`; numerical breakdowns inside a case
/// become failed reports carrying the error.
pub fn run_suite(name: &str, params: &SuiteParams) -> Result<Vec<VerificationReport>> {
    let cs = cases(name, params)?;
    let results: Vec<Result<Vec<VerificationReport>>> = cs
        .par_iter()
        .map(|c| {
            let start = std::time::Instant::now();
            let mut rs = match run_case(c, params) {
                Err(e @ (Error::Precondition(_) | Error::Parse(_))) => return Err(e),
                Err(e) => vec![error_report(format!("{name}/{}", case_id(c)), &e)],
                Ok(rs) => rs,
            };
            if params.timing {
                let ms = start.elapsed().as_millis() as u64;
                rs.iter_mut().for_each(|r| r.wall_ms = Some(ms));
            }
            Ok(rs)
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
