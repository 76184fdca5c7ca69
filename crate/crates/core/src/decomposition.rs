//! Exact checks of the decomposition identities.
//!
//! The Appell side of a decomposition has a pole at `ζ = 1`, so it has no
//! expansion with finite ζ-support per q-slice. Both sides are therefore
//! multiplied by `θ(z)^N` first: every `(1 - q^kζ)^{-j}` is then absorbed by
//! [`QZSeries::div_pole`] on `θ^N`, and the identity becomes one between exact
//! truncated series.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gaussian::GQ;
use crate::jets::{laurent_coeffs, LaurentData};
use crate::quotient::{JacobiQuotient, KacWakimotoSpec, ThetaFactor};
use crate::rational::{fmt_q, q, qi, Q};
use crate::report::VerificationReport;
use crate::series::{inv_factorial, DVar, QZSeries, SeriesPrecision};
use crate::special::appell::{appell_f_jet, AppellJet};
use crate::special::partial_theta::{partial_theta, partial_theta_derivative_at_zero};
use crate::special::partitions::{crank_rank, CrankOrRank};
use crate::special::tails::{sum_of_tails_sides, TailGrading};
use crate::special::theta::{eta_and_d, theta_series, theta_vv};

/// An Appell jet multiplied by a ζ-free q-series.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledAppellJet {
    pub scale: QZSeries,
    pub jet: AppellJet,
}

/// Deliberate corruptions used to show that the harness can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    None,
    /// Add an integer to `D_{n,0}`.
    PerturbD {
        n: usize,
        delta: i64,
    },
    /// Use `1 - ε` in the Appell sums.
    FlipEps,
    /// Negate every Appell term with pole index `k`.
    FlipAppellSign {
        k: i64,
    },
}

impl Mutation {
    pub fn label(&self) -> String {
        match *self {
            Mutation::None => "none".into(),
            Mutation::PerturbD { n, delta } => format!("perturb-D{n}{delta:+}"),
            Mutation::FlipEps => "flip-eps".into(),
            Mutation::FlipAppellSign { k } => format!("flip-appell-sign-k{k}"),
        }
    }
}

fn sp(p: Q) -> Result<SeriesPrecision> {
    SeriesPrecision::new(p)
}

/// Laurent data of `φ_{M,N}` at `z = 0`, certified to `p`.
pub fn kac_wakimoto_laurent(spec: KacWakimotoSpec, p: Q) -> Result<LaurentData> {
    laurent_coeffs(&spec.quotient(), spec.n as i64 + 4, sp(p)?)
}

/// The terms `-D_{n,0}/(n-1)! · 𝒟_v^{n-1} F_{(N-M)/2, ε(N)}(z,v)|_{v=0}`, `n = 1..N`.
///
/// `laurent_p` is the precision of the `D_{n,0}` and `appell_p` the certified
/// precision of the Appell cutoff.
pub fn thm1_rhs_exact(spec: KacWakimotoSpec, laurent_p: Q, appell_p: Q) -> Result<Vec<ScaledAppellJet>> {
    thm1_rhs_mutated(spec, laurent_p, appell_p, Mutation::None)
}

fn thm1_rhs_mutated(
    spec: KacWakimotoSpec,
    laurent_p: Q,
    appell_p: Q,
    mutation: Mutation,
) -> Result<Vec<ScaledAppellJet>> {
    let ld = kac_wakimoto_laurent(spec, laurent_p)?;
    let mut eps = spec.parity();
    if mutation == Mutation::FlipEps {
        eps = 1 - eps;
    }
    let jets = appell_f_jet(spec.level(), eps, spec.n - 1, appell_p)?;
    let mut out = Vec::with_capacity(spec.n as usize);
    for n in 1..=spec.n as usize {
        let mut d = ld.get(n);
        if let Mutation::PerturbD { n: which, delta } = mutation {
            if which == n {
                d = d.add(&QZSeries::constant(GQ::from_int(delta), None));
            }
        }
        let scale = d.scale_rational(&inv_factorial(n as u32 - 1)).neg();
        let mut jet = jets[n - 1].clone();
        if let Mutation::FlipAppellSign { k } = mutation {
            for t in jet.terms.iter_mut().filter(|t| t.pole_k == k) {
                t.coeff = -t.coeff.clone();
            }
        }
        out.push(ScaledAppellJet { scale, jet });
    }
    Ok(out)
}

/// Both sides of `θ^N φ_{M,N} = θ^N · (Appell side)`, exact below `q^target`.
pub fn cor12_sides(spec: KacWakimotoSpec, target: Q, mutation: Mutation) -> Result<(QZSeries, QZSeries)> {
    let n = spec.n as i64;
    let margin = q(n, 8) + qi(1);
    let theta = theta_series(sp(target + margin)?);
    let theta_n = theta.pow(spec.n);
    let lhs = if spec.m == 0 { QZSeries::one(None) } else { theta.shift_z(Q::zero(), q(1, 2))?.pow(spec.m) };
    let rhs_terms = thm1_rhs_mutated(spec, target + margin, target, mutation)?;
    // group the ζ-free multipliers by pole factor (k, j)
    let mut groups: BTreeMap<(i64, u32), QZSeries> = BTreeMap::new();
    for sj in &rhs_terms {
        for t in &sj.jet.terms {
            let piece = sj.scale.mul_monomial(&t.coeff, t.q_exp, t.z_exp);
            let slot = groups.entry((t.pole_k, t.pole_order)).or_insert_with(|| QZSeries::zero(None));
            *slot = slot.add(&piece);
        }
    }
    let mut rhs = QZSeries::zero(None);
    for ((k, j), mult) in groups {
        if mult.is_empty() {
            continue;
        }
        if k == 0 && j > spec.n {
            return Err(Error::Precondition(format!("pole order {j} exceeds N = {}", spec.n)));
        }
        let absorbed = theta_n.div_pole(k, j)?;
        rhs = rhs.add(&absorbed.mul(&mult));
    }
    Ok((lhs.truncate(target), rhs.truncate(target)))
}

/// Checks the Kac–Wakimoto decomposition after clearing `θ^N`.
pub fn verify_cor12(spec: KacWakimotoSpec, precision: SeriesPrecision) -> Result<VerificationReport> {
    verify_cor12_mutated(spec, precision, Mutation::None)
}

pub fn verify_cor12_mutated(
    spec: KacWakimotoSpec,
    precision: SeriesPrecision,
    mutation: Mutation,
) -> Result<VerificationReport> {
    let t = precision.target();
    let (lhs, rhs) = cor12_sides(spec, t, mutation)?;
    for side in [&lhs, &rhs] {
        if side.prec().is_some_and(|p| p < t) {
            return Err(Error::PrecisionUnreachable(fmt_q(&t)));
        }
    }
    let id = match mutation {
        Mutation::None => format!("cor12/M={},N={}", spec.m, spec.n),
        other => format!("cor12/M={},N={}/mutant={}", spec.m, spec.n, other.label()),
    };
    Ok(VerificationReport::new(id, t)
        .with("index", fmt_q(&spec.index()))
        .with("eps", spec.parity())
        .with("terms_compared", lhs.len().max(rhs.len()))
        .compare(lhs.first_difference(&rhs, t)))
}

/// `Σ_{n=1}^{N} D_{n,0}/(n-1)! · 𝒟_z^{n-1} θ⁺_{ℓ,ε(N),(N-M)/2}(z)|_{z=0}`.
pub fn thm2_rhs_exact(spec: KacWakimotoSpec, ell: Q, precision: SeriesPrecision) -> Result<QZSeries> {
    let p = precision.target();
    if !(ell - spec.index()).is_integer() {
        return Err(Error::Precondition(format!(
            "ℓ = {} is not in m + ℤ with m = {}",
            fmt_q(&ell),
            fmt_q(&spec.index())
        )));
    }
    // D_{n,0} has valuation at least -N/8
    let margin = q(spec.n as i64, 8) + qi(1);
    let ld = kac_wakimoto_laurent(spec, p + margin)?;
    let mut acc = QZSeries::zero(None);
    for n in 1..=spec.n as usize {
        let deriv = partial_theta_derivative_at_zero(ell, spec.parity(), spec.level(), n as u32 - 1, sp(p + margin)?)?;
        let term = ld.get(n).mul(&deriv).scale_rational(&inv_factorial(n as u32 - 1));
        acc = acc.add(&term);
    }
    Ok(acc.truncate(p))
}

/// Precision at which a partial theta must be built so that after `z ↦ z + λτ`
/// every coefficient below `q^p` is still exact.
fn shifted_partial_theta_precision(level: Q, lambda: Q, p: Q) -> Q {
    let lam = crate::rational::to_f64(&crate::rational::abs_q(&lambda));
    let m = crate::rational::to_f64(&level);
    let target = crate::rational::to_f64(&p);
    let mut pp = p.ceil();
    loop {
        let r = (4.0 * m * crate::rational::to_f64(&pp)).sqrt();
        if r * r / (4.0 * m) - lam * r >= target + 1.0 {
            return pp;
        }
        pp += qi(1);
    }
}

fn pt_label(level: Q, eps: u8, ell: Q) -> String {
    format!("M={},eps={},ell={}", fmt_q(&level), eps, fmt_q(&ell))
}

/// `(-1)^{2ℓμ} q^{Mλ²} ζ^{2Mλ} θ⁺_{ℓ,ε,M}(z+λτ+μ) = θ⁺_{ℓ-2Mλ,ε,M}(z)`.
pub fn eq32_check(
    level: Q,
    eps: u8,
    ell: Q,
    lambda: i64,
    mu: i64,
    precision: SeriesPrecision,
) -> Result<VerificationReport> {
    let p = precision.target();
    let lam = qi(lambda);
    let big = shifted_partial_theta_precision(level, lam, p + level * lambda * lambda);
    let base = partial_theta(ell, eps, level, sp(big)?)?;
    let sign = if (ell * 2 * mu).to_integer().rem_euclid(2) == 0 { 1 } else { -1 };
    let lhs = base.shift_z(lam, qi(mu))?.with_prec(Some(p - level * lambda * lambda)).mul_monomial(
        &GQ::from_int(sign),
        level * lambda * lambda,
        level * 2 * lambda,
    );
    let rhs = partial_theta(ell - level * 2 * lambda, eps, level, precision)?;
    let id = format!("eq32/{},lambda={},mu={}", pt_label(level, eps, ell), lambda, mu);
    Ok(VerificationReport::new(id, p).compare(lhs.first_difference(&rhs, p)))
}

/// `θ⁺_{ℓ,ε,M}(z) - (-1)^ε q^M ζ^{2M} θ⁺_{ℓ,ε,M}(z+τ) = q^{ℓ²/4M} ζ^{-ℓ}`.
pub fn eq33_check(level: Q, eps: u8, ell: Q, precision: SeriesPrecision) -> Result<VerificationReport> {
    let p = precision.target();
    let big = shifted_partial_theta_precision(level, qi(1), p);
    let base = partial_theta(ell, eps, level, sp(big)?)?;
    let sign = if eps == 1 { 1 } else { -1 };
    let shifted = base.shift_z(qi(1), qi(0))?.with_prec(Some(p)).mul_monomial(&GQ::from_int(sign), level, level * 2);
    let lhs = base.truncate(p).add(&shifted);
    let rhs = QZSeries::monomial(GQ::one(), ell * ell / (level * 4), -ell, Some(p));
    let id = format!("eq33/{}", pt_label(level, eps, ell));
    Ok(VerificationReport::new(id, p).compare(lhs.first_difference(&rhs, p)))
}

/// Both partial theta identities at one parameter point.
pub fn partial_theta_identity_check(
    level: Q,
    eps: u8,
    ell: Q,
    lambda: i64,
    mu: i64,
    precision: SeriesPrecision,
) -> Result<Vec<VerificationReport>> {
    Ok(vec![eq32_check(level, eps, ell, lambda, mu, precision)?, eq33_check(level, eps, ell, precision)?])
}

/// Theta decomposition of `θ²`: slices `h_ℓ = q^{-ℓ²/4} [ζ^ℓ]θ²` for `ℓ ∈ {0,1}`.
pub fn theta_squared_slices(precision: SeriesPrecision) -> Result<(QZSeries, [QZSeries; 2])> {
    let p = precision.target();
    let th2 = theta_series(sp(p + qi(1))?).pow(2);
    let h = [0i64, 1].map(|l| th2.extract_zeta(qi(l)).mul_monomial(&GQ::one(), -q(l * l, 4), qi(0)));
    Ok((th2, h))
}

pub fn theta_decomp_check(precision: SeriesPrecision) -> Result<VerificationReport> {
    let p = precision.target();
    let (th2, h) = theta_squared_slices(precision)?;
    let wide = sp(p + qi(2))?;
    let mut reassembled = QZSeries::zero(None);
    for (l, hl) in h.iter().enumerate() {
        reassembled = reassembled.add(&hl.mul(&theta_vv(1, l as i64, wide)));
    }
    let integral_support = th2.zeta_support().iter().all(|s| s.is_integer());
    let mut r = VerificationReport::new("theta-decomp/theta^2", p)
        .with("integral_zeta_support", integral_support)
        .with("h0_leading", h[0].terms().next().map(|t| t.2.to_string()).unwrap_or_default())
        .with("h1_leading", h[1].terms().next().map(|t| t.2.to_string()).unwrap_or_default())
        .compare(th2.truncate(p).first_difference(&reassembled.truncate(p), p));
    if !integral_support && r.passed() {
        r.status = crate::report::Status::Fail;
    }
    Ok(r)
}

/// Product and sum forms of `θ` agree below `q^precision`.
pub fn triple_product_check(precision: SeriesPrecision) -> Result<VerificationReport> {
    let p = precision.target();
    let prod = theta_series(precision);
    let sum = crate::special::theta::theta_sum_form(precision);
    Ok(VerificationReport::new("theta-decomp/triple-product", p)
        .with("terms", sum.len())
        .compare(prod.first_difference(&sum, p)))
}

pub fn sum_of_tails_check(precision: SeriesPrecision) -> Result<VerificationReport> {
    let p = precision.target();
    let fit = sum_of_tails_sides(precision)?;
    let mut r = VerificationReport::new("sum-of-tails", p).with("fitted", fit.describe()).with(
        "printed_form_matches_low_orders",
        fit.candidates.iter().any(|c| c.0 == q(-1, 2) && c.1 == TailGrading::Shifted && c.2),
    );
    for (sigma, grading, ok) in &fit.candidates {
        r = r.with(&format!("candidate sigma={} grading={:?}", fmt_q(sigma), grading), ok);
    }
    Ok(r.compare(fit.discrepancy.clone()))
}

/// Monomial normalization `q^α ζ^β (ζ^{1/2} - ζ^{-1/2})^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Normalization {
    pub alpha: Q,
    pub beta: Q,
    pub gamma: i64,
}

impl Normalization {
    pub fn label(&self) -> String {
        format!("q^{} zeta^{} s^{}", fmt_q(&self.alpha), fmt_q(&self.beta), self.gamma)
    }
}

/// Fitted normalizations of crank and rank.
#[derive(Clone, Debug, PartialEq)]
pub struct RankCrankFit {
    pub crank: Normalization,
    pub rank: Normalization,
}

fn s_series() -> QZSeries {
    QZSeries::from_terms([(qi(0), q(1, 2), GQ::one()), (qi(0), q(-1, 2), GQ::from_int(-1))], None)
}

fn c_series() -> QZSeries {
    QZSeries::from_terms([(qi(0), q(1, 2), GQ::from_ratio(1, 2)), (qi(0), q(-1, 2), GQ::from_ratio(1, 2))], None)
}

struct RankCrankPieces {
    eta2_c3: QZSeries,
    rank: QZSeries,
}

impl RankCrankPieces {
    fn build(rel_p: Q, window: i64) -> Result<Self> {
        let prec = sp(rel_p)?;
        let crank = crank_rank(CrankOrRank::Crank, prec, window)?;
        let rank = crank_rank(CrankOrRank::Rank, prec, window)?;
        let (eta, _) = eta_and_d(sp(rel_p + q(1, 12))?);
        let eta2_c3 = eta.pow(2).mul(&crank.pow(3)).scale(&GQ::from_int(2));
        Ok(Self { eta2_c3, rank })
    }

    /// Both sides multiplied by `s^{2-γ_R}`, or `None` when that leaves a negative power of `s`.
    fn sides(&self, c: Normalization, r: Normalization) -> Option<(QZSeries, QZSeries)> {
        let k = 3 * c.gamma + 2 - r.gamma;
        if k < 0 {
            return None;
        }
        let s = s_series();
        let lhs = self.eta2_c3.mul(&s.pow(k as u32)).mul_monomial(&GQ::one(), c.alpha * 3, c.beta * 3);
        let x = self.rank.mul_monomial(&GQ::one(), r.alpha, r.beta);
        let x1 = x.apply_d(DVar::Z);
        let x2 = x1.apply_d(DVar::Z);
        let xt = x.apply_d(DVar::Tau);
        let g = r.gamma;
        let s2 = s.pow(2);
        let c1 = c_series();
        let mut rhs = s2.mul(&xt.scale(&GQ::from_int(6)).add(&x2));
        if g != 0 {
            rhs = rhs.add(&s.mul(&c1).mul(&x1).scale(&GQ::from_int(2 * g)));
            let coeff = c1.pow(2).scale(&GQ::from_int(g * (g - 1))).add(&s2.scale(&GQ::from_ratio(g, 4)));
            rhs = rhs.add(&coeff.mul(&x));
        }
        Some((lhs, rhs))
    }
}

fn candidate_grid() -> Vec<(Normalization, Normalization)> {
    let betas: Vec<Q> = (-2..=2).map(|b| q(b, 2)).collect();
    let mut out = Vec::new();
    for a in -6..=6 {
        let alpha_c = q(a, 24);
        for &beta_c in &betas {
            for gamma_c in -1..=1 {
                for &beta_r in &betas {
                    for gamma_r in -1..=1 {
                        let c = Normalization { alpha: alpha_c, beta: beta_c, gamma: gamma_c };
                        let r = Normalization { alpha: alpha_c * 3 + q(1, 12), beta: beta_r, gamma: gamma_r };
                        out.push((c, r));
                    }
                }
            }
        }
    }
    out
}

/// Normalizations matching the relative q-orders `lo..hi` (measured from `q^{α_R}`).
fn fit_on_orders(pieces: &RankCrankPieces, lo: i64, hi: i64) -> Vec<(Normalization, Normalization)> {
    candidate_grid()
        .into_iter()
        .filter(|&(c, r)| {
            let Some((lhs, rhs)) = pieces.sides(c, r) else {
                return false;
            };
            let start = r.alpha + qi(lo);
            let end = r.alpha + qi(hi);
            let nonzero = lhs.terms().any(|t| t.0 >= start && t.0 < end);
            let diff = lhs.sub(&rhs);
            nonzero && !diff.terms().any(|t| t.0 >= start && t.0 < end)
        })
        .collect()
}

/// Fits `𝒞*`, `ℛ*` on the two lowest orders, refits on orders 2 and 3, and
/// checks `2η²𝒞*³ = (6𝒟_τ + 𝒟_z²)ℛ*` (multiplied by `s^{2-γ_R}`) below relative order `precision`.
pub fn rank_crank_check(precision: SeriesPrecision, window: i64) -> Result<(VerificationReport, RankCrankFit)> {
    let rel = precision.target();
    let small = RankCrankPieces::build(qi(5), window)?;
    let low = fit_on_orders(&small, 0, 2);
    let high = fit_on_orders(&small, 2, 4);
    let (c, r) = *low
        .first()
        .ok_or_else(|| Error::NoConsistentFit("no monomial normalization matches the two lowest orders".into()))?;
    let pieces = RankCrankPieces::build(rel + qi(1), window)?;
    let (lhs, rhs) = pieces.sides(c, r).expect("fitted candidate is admissible");
    let upto = r.alpha + rel;
    let lhs_w = lhs.window(window);
    let rhs_w = rhs.window(window);
    let report = VerificationReport::new("rank-crank", rel)
        .with("crank_normalization", c.label())
        .with("rank_normalization", r.label())
        .with("low_order_fits", low.len())
        .with("refit_orders_2_3_agree", high.contains(&(c, r)))
        .with("zeta_window", window)
        .compare(lhs_w.first_difference(&rhs_w, upto));
    let report = if !high.contains(&(c, r)) && report.passed() {
        VerificationReport { status: crate::report::Status::Fail, ..report }
    } else {
        report
    };
    Ok((report, RankCrankFit { crank: c, rank: r }))
}

/// The quotient `θ(z+τ/2) / (θ(z) θ(z+1/2+τ/2))`: index `-1/2`, simple poles at
/// `0` and `-1/2-τ/2`.
pub fn two_pole_quotient() -> JacobiQuotient {
    JacobiQuotient::new(vec![
        ThetaFactor::new(q(1, 2), qi(0), 1),
        ThetaFactor::new(qi(0), qi(0), -1),
        ThetaFactor::new(q(1, 2), q(1, 2), -1),
    ])
}
