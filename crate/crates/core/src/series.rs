//! Truncated bivariate Puiseux–Laurent series in `q` and `ζ` over ℚ(i).
//!
//! A [`QZSeries`] stores exponents as integers over per-series common
//! denominators and carries a precision `prec`: every term with q-exponent
//! below `prec` is present and exact, and nothing at or above it is stored.
//! `prec == None` marks an exact (untruncated) finite series.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GQ;
use crate::rational::{fmt_q, lcm, parse_q, Q};

/// Precision: `None` is "exact", `Some(p)` means exact below `q^p`.
pub type Prec = Option<Q>;

pub fn min_prec(a: Prec, b: Prec) -> Prec {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if x < y { x } else { y }),
    }
}

fn shift_prec(p: Prec, by: Q) -> Prec {
    p.map(|x| x + by)
}

/// Which variable a `𝒟 = (2πi)^{-1} ∂` acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DVar {
    Tau,
    Z,
}

#[derive(Clone, PartialEq, Eq)]
pub struct QZSeries {
    q_den: i64,
    z_den: i64,
    terms: BTreeMap<(i64, i64), GQ>,
    prec: Prec,
}

/// Requested truncation order for constructors of infinite objects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeriesPrecision(Q);

impl SeriesPrecision {
    pub fn new(target: Q) -> Result<Self> {
        if target <= Q::zero() {
            return Err(Error::Precondition(format!("precision must be positive, got {target}")));
        }
        Ok(Self(target))
    }

    pub fn target(&self) -> Q {
        self.0
    }
}

impl QZSeries {
    pub fn zero(prec: Prec) -> Self {
        Self { q_den: 1, z_den: 1, terms: BTreeMap::new(), prec }
    }

    pub fn one(prec: Prec) -> Self {
        Self::monomial(GQ::one(), Q::zero(), Q::zero(), prec)
    }

    pub fn constant(c: GQ, prec: Prec) -> Self {
        Self::monomial(c, Q::zero(), Q::zero(), prec)
    }

    pub fn monomial(c: GQ, q_exp: Q, z_exp: Q, prec: Prec) -> Self {
        Self::from_terms([(q_exp, z_exp, c)], prec)
    }

    /// Builds a series from `(q_exp, z_exp, coeff)` triples; repeated keys are summed
    /// and terms at or above `prec` are dropped.
    pub fn from_terms<I>(terms: I, prec: Prec) -> Self
    where
        I: IntoIterator<Item = (Q, Q, GQ)>,
    {
        let terms: Vec<(Q, Q, GQ)> = terms.into_iter().collect();
        let mut qd = 1i64;
        let mut zd = 1i64;
        for (a, s, _) in &terms {
            qd = lcm(qd, *a.denom());
            zd = lcm(zd, *s.denom());
        }
        let mut map: BTreeMap<(i64, i64), GQ> = BTreeMap::new();
        for (a, s, c) in terms {
            if let Some(p) = prec {
                if a >= p {
                    continue;
                }
            }
            let key = ((a * qd).to_integer(), (s * zd).to_integer());
            *map.entry(key).or_default() += &c;
        }
        map.retain(|_, c| !c.is_zero());
        let mut out = Self { q_den: qd, z_den: zd, terms: map, prec };
        out.normalize();
        out
    }

    fn from_raw(q_den: i64, z_den: i64, terms: BTreeMap<(i64, i64), GQ>, prec: Prec) -> Self {
        let mut out = Self { q_den, z_den, terms, prec };
        out.terms.retain(|_, c| !c.is_zero());
        if let Some(p) = prec {
            let cut = q_cut(p, q_den);
            out.terms.retain(|k, _| k.0 < cut);
        }
        out.normalize();
        out
    }

    /// Reduces `q_den`/`z_den` to the smallest values consistent with the stored terms.
    fn normalize(&mut self) {
        let mut gq = self.q_den;
        let mut gz = self.z_den;
        for &(a, s) in self.terms.keys() {
            gq = gq.gcd(&a);
            gz = gz.gcd(&s);
            if gq == 1 && gz == 1 {
                break;
            }
        }
        if gq > 1 || gz > 1 {
            let terms = std::mem::take(&mut self.terms);
            self.terms = terms.into_iter().map(|((a, s), c)| ((a / gq, s / gz), c)).collect();
            self.q_den /= gq;
            self.z_den /= gz;
        }
    }

    fn rescaled(&self, qd: i64, zd: i64) -> Vec<(i64, i64, &GQ)> {
        let fq = qd / self.q_den;
        let fz = zd / self.z_den;
        self.terms.iter().map(|(&(a, s), c)| (a * fq, s * fz, c)).collect()
    }

    pub fn q_den(&self) -> i64 {
        self.q_den
    }

    pub fn z_den(&self) -> i64 {
        self.z_den
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Least stored q-exponent.
    pub fn valuation(&self) -> Option<Q> {
        self.terms.keys().next().map(|k| Q::new(k.0, self.q_den))
    }

    /// A lower bound for the true q-valuation: `None` means +∞ (exact zero).
    pub fn valuation_bound(&self) -> Option<Q> {
        match (self.valuation(), self.prec) {
            (Some(v), Some(p)) => Some(if v < p { v } else { p }),
            (Some(v), None) => Some(v),
            (None, p) => p,
        }
    }

    /// Terms as `(q_exp, z_exp, coeff)` in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Q, Q, &GQ)> + '_ {
        self.terms.iter().map(move |(&(a, s), c)| (Q::new(a, self.q_den), Q::new(s, self.z_den), c))
    }

    pub fn coeff(&self, q_exp: Q, z_exp: Q) -> GQ {
        let a = q_exp * self.q_den;
        let s = z_exp * self.z_den;
        if !a.is_integer() || !s.is_integer() {
            return GQ::zero();
        }
        self.terms.get(&(a.to_integer(), s.to_integer())).cloned().unwrap_or_default()
    }

    /// True when no stored coefficient is imaginary.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(GQ::is_real)
    }

    pub fn is_zeta_free(&self) -> bool {
        self.terms.keys().all(|k| k.1 == 0)
    }

    /// Largest `|ζ-exponent|` present.
    pub fn zeta_extent(&self) -> Q {
        let m = self.terms.keys().map(|k| k.1.abs()).max().unwrap_or(0);
        Q::new(m, self.z_den)
    }

    /// Drops everything at or above `p` (never raises the precision).
    pub fn truncate(&self, p: Q) -> Self {
        let prec = min_prec(self.prec, Some(p));
        Self::from_raw(self.q_den, self.z_den, self.terms.clone(), prec)
    }

    /// Overrides the precision of an exactly known series.
    pub fn with_prec(mut self, p: Prec) -> Self {
        self.prec = p;
        if let Some(p) = p {
            let cut = q_cut(p, self.q_den);
            self.terms.retain(|k, _| k.0 < cut);
        }
        self.normalize();
        self
    }

    /// Per-q-slice view: q-exponent → list of `(ζ-exponent, coeff)`.
    pub fn slices(&self) -> BTreeMap<Q, Vec<(Q, GQ)>> {
        let mut out: BTreeMap<Q, Vec<(Q, GQ)>> = BTreeMap::new();
        for (a, s, c) in self.terms() {
            out.entry(a).or_default().push((s, c.clone()));
        }
        out
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(k, c)| (*k, -c)).collect();
        Self { q_den: self.q_den, z_den: self.z_den, terms, prec: self.prec }
    }

    pub fn add(&self, other: &Self) -> Self {
        let qd = lcm(self.q_den, other.q_den);
        let zd = lcm(self.z_den, other.z_den);
        let prec = min_prec(self.prec, other.prec);
        let mut map: BTreeMap<(i64, i64), GQ> = BTreeMap::new();
        for (a, s, c) in self.rescaled(qd, zd).into_iter().chain(other.rescaled(qd, zd)) {
            *map.entry((a, s)).or_default() += c;
        }
        Self::from_raw(qd, zd, map, prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &GQ) -> Self {
        if c.is_zero() {
            return Self::zero(self.prec);
        }
        let terms = self.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        Self { q_den: self.q_den, z_den: self.z_den, terms, prec: self.prec }
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        self.scale(&GQ::from_big(r.clone()))
    }

    /// Multiplies by `c·q^a·ζ^s`; precision shifts by `a`.
    pub fn mul_monomial(&self, c: &GQ, q_exp: Q, z_exp: Q) -> Self {
        if c.is_zero() {
            return Self::zero(shift_prec(self.prec, q_exp));
        }
        let qd = lcm(self.q_den, *q_exp.denom());
        let zd = lcm(self.z_den, *z_exp.denom());
        let da = (q_exp * qd).to_integer();
        let ds = (z_exp * zd).to_integer();
        let terms = self.rescaled(qd, zd).into_iter().map(|(a, s, v)| ((a + da, s + ds), v * c)).collect();
        Self::from_raw(qd, zd, terms, shift_prec(self.prec, q_exp))
    }

    /// Exact product. The result precision is `min(prec_a + val_b, prec_b + val_a)`
    /// with `val` the valuation lower bound of the other factor.
    pub fn mul(&self, other: &Self) -> Self {
        let qd = lcm(self.q_den, other.q_den);
        let zd = lcm(self.z_den, other.z_den);
        let prec = product_prec(self, other);
        if self.is_empty() || other.is_empty() {
            return Self::zero(prec);
        }
        let cut = prec.map(|p| q_cut(p, qd));
        let a = self.rescaled(qd, zd);
        let b = other.rescaled(qd, zd);
        let mut acc: HashMap<(i64, i64), GQ> = HashMap::with_capacity(a.len().max(b.len()) * 4);
        for (qa, za, ca) in &a {
            for (qb, zb, cb) in &b {
                let qn = qa + qb;
                if let Some(cut) = cut {
                    if qn >= cut {
                        break;
                    }
                }
                let prod = *ca * *cb;
                match acc.entry((qn, za + zb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += &prod,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        Self::from_raw(qd, zd, acc.into_iter().collect(), prec)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one(None);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Integer power, negative exponents through [`QZSeries::invert`].
    pub fn powi(&self, n: i64) -> Result<Self> {
        if n >= 0 {
            Ok(self.pow(n as u32))
        } else {
            Ok(self.invert()?.pow((-n) as u32))
        }
    }

    /// Multiplies by the exact binomial `(1 - c·q^e·ζ^s)`; precision drops by `e` when `e < 0`.
    pub fn mul_binomial(&self, c: &GQ, q_exp: Q, z_exp: Q) -> Self {
        self.mul_binomial_exact(c, q_exp, z_exp)
    }

    /// Multiplicative inverse. The lowest q-slice must be a single ζ-monomial.
    pub fn invert(&self) -> Result<Self> {
        let (&(a0, s0), c0) = self.terms.iter().next().ok_or_else(|| Error::NonUnit("empty series".into()))?;
        if let Some(((a1, _), _)) = self.terms.iter().nth(1) {
            if *a1 == a0 {
                return Err(Error::NonUnit(format!(
                    "lowest slice q^{} has more than one zeta-term",
                    fmt_q(&Q::new(a0, self.q_den))
                )));
            }
        }
        let v = Q::new(a0, self.q_den);
        let s = Q::new(s0, self.z_den);
        let cinv = c0.inv()?;
        // u = a / (c q^v ζ^s) = 1 + r, r of positive valuation
        let u = self.mul_monomial(&cinv, -v, -s);
        let rel_prec = u.prec;
        let qd = u.q_den;
        let mut r_levels: BTreeMap<i64, Vec<(i64, GQ)>> = BTreeMap::new();
        for (&(a, z), c) in &u.terms {
            if a == 0 {
                continue;
            }
            r_levels.entry(a).or_default().push((z, c.clone()));
        }
        let max_level = match rel_prec {
            Some(p) => q_cut(p, qd) - 1,
            None => {
                if r_levels.is_empty() {
                    0
                } else {
                    return Err(Error::NonUnit("inverse of an exact non-monomial series needs a precision".into()));
                }
            }
        };
        let mut b_levels: BTreeMap<i64, BTreeMap<i64, GQ>> = BTreeMap::new();
        b_levels.insert(0, BTreeMap::from([(0, GQ::one())]));
        let step = r_levels.keys().copied().fold(0i64, |g, k| g.gcd(&k)).max(1);
        let mut n = step;
        while n <= max_level {
            let mut level: BTreeMap<i64, GQ> = BTreeMap::new();
            for (&k, rk) in r_levels.range(1..=n) {
                if let Some(bprev) = b_levels.get(&(n - k)) {
                    for (zr, cr) in rk {
                        for (zb, cb) in bprev {
                            *level.entry(zr + zb).or_default() -= &(cr * cb);
                        }
                    }
                }
            }
            level.retain(|_, c| !c.is_zero());
            if !level.is_empty() {
                b_levels.insert(n, level);
            }
            n += step;
        }
        let mut terms = BTreeMap::new();
        for (a, lvl) in b_levels {
            for (z, c) in lvl {
                terms.insert((a, z), c);
            }
        }
        let b = Self::from_raw(qd, u.z_den, terms, rel_prec);
        Ok(b.mul_monomial(&cinv, -v, -s))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.invert()?))
    }

    /// Divides by `(1 - q^k ζ)^j`.
    ///
    /// `k ≥ 1` expands geometrically in `q^k ζ`; `k ≤ -1` uses
    /// `1/(1-q^kζ) = -q^{-k}ζ^{-1}/(1-q^{-k}ζ^{-1})`; `k = 0` is exact Laurent
    /// polynomial division in every q-slice.
    pub fn div_pole(&self, k: i64, j: u32) -> Result<Self> {
        if k != 0 && self.prec.is_none() && !self.is_empty() {
            return Err(Error::Precondition("geometric pole expansion needs a finite precision".into()));
        }
        let mut out = self.clone();
        for _ in 0..j {
            out = match k.cmp(&0) {
                Ordering::Greater => out.div_geometric(Q::from_integer(k), Q::from_integer(1)),
                Ordering::Less => out.div_geometric(Q::from_integer(-k), Q::from_integer(-1)).mul_monomial(
                    &GQ::from_int(-1),
                    Q::from_integer(-k),
                    Q::from_integer(-1),
                ),
                Ordering::Equal => out.div_one_minus_zeta()?,
            };
        }
        Ok(out)
    }

    /// Divides by `(1 - q^κ ζ^σ)` for `κ > 0`: `b(α,s) = a(α,s) + b(α-κ, s-σ)`.
    fn div_geometric(&self, kappa: Q, sigma: Q) -> Self {
        debug_assert!(kappa > Q::zero());
        let qd = lcm(self.q_den, *kappa.denom());
        let zd = lcm(self.z_den, *sigma.denom());
        let kq = (kappa * qd).to_integer();
        let sz = (sigma * zd).to_integer();
        let Some(p) = self.prec else {
            return self.clone();
        };
        let cut = q_cut(p, qd);
        let mut levels: BTreeMap<i64, BTreeMap<i64, GQ>> = BTreeMap::new();
        for (a, s, c) in self.rescaled(qd, zd) {
            levels.entry(a).or_default().insert(s, c.clone());
        }
        let mut out: BTreeMap<(i64, i64), GQ> = BTreeMap::new();
        let mut cursor: Option<i64> = levels.keys().next().copied();
        while let Some(a) = cursor {
            if a >= cut {
                break;
            }
            let mut lvl = levels.remove(&a).unwrap_or_default();
            lvl.retain(|_, c| !c.is_zero());
            if !lvl.is_empty() {
                let carry = levels.entry(a + kq).or_default();
                for (s, c) in &lvl {
                    *carry.entry(s + sz).or_default() += c;
                    out.insert((a, *s), c.clone());
                }
            }
            cursor = levels.range(a + 1..).next().map(|(k, _)| *k);
        }
        Self::from_raw(qd, zd, out, self.prec)
    }

    fn div_one_minus_zeta(&self) -> Result<Self> {
        let step = self.z_den;
        let mut out: BTreeMap<(i64, i64), GQ> = BTreeMap::new();
        for (a, slice) in self.raw_slices() {
            let mut classes: BTreeMap<i64, BTreeMap<i64, GQ>> = BTreeMap::new();
            for (s, c) in slice {
                classes.entry(s.rem_euclid(step)).or_default().insert(s, c);
            }
            for (_, terms) in classes {
                // a = (1-ζ) b  ⇒  b_s = Σ_{t ≤ s} a_t, and the full sum must vanish
                let lo = *terms.keys().next().unwrap();
                let hi = *terms.keys().next_back().unwrap();
                let mut running = GQ::zero();
                let mut s = lo;
                while s <= hi {
                    if let Some(c) = terms.get(&s) {
                        running += c;
                    }
                    if s < hi && !running.is_zero() {
                        out.insert((a, s), running.clone());
                    }
                    s += step;
                }
                if !running.is_zero() {
                    return Err(Error::NotDivisible { q: fmt_q(&Q::new(a, self.q_den)), order: 1 });
                }
            }
        }
        Ok(Self::from_raw(self.q_den, self.z_den, out, self.prec))
    }

    fn raw_slices(&self) -> BTreeMap<i64, Vec<(i64, GQ)>> {
        let mut out: BTreeMap<i64, Vec<(i64, GQ)>> = BTreeMap::new();
        for (&(a, s), c) in &self.terms {
            out.entry(a).or_default().push((s, c.clone()));
        }
        out
    }

    /// `𝒟_τ` multiplies `q^α ζ^s` by `α`; `𝒟_z` by `s`.
    pub fn apply_d(&self, which: DVar) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&(a, s), c)| {
                let factor = match which {
                    DVar::Tau => BigRational::new(BigInt::from(a), BigInt::from(self.q_den)),
                    DVar::Z => BigRational::new(BigInt::from(s), BigInt::from(self.z_den)),
                };
                ((a, s), c.scale(&factor))
            })
            .collect();
        Self::from_raw(self.q_den, self.z_den, terms, self.prec)
    }

    /// Substitutes `z ↦ z + λτ + μ`: `q^α ζ^s ↦ e(μs) q^{α+λs} ζ^s`.
    ///
    /// The precision drops by the most negative `λs` over the ζ-range of the
    /// series widened by one unit on each side.
    pub fn shift_z(&self, lambda: Q, mu: Q) -> Result<Self> {
        let qd = lcm(self.q_den, lambda.denom() * self.z_den);
        let zd = self.z_den;
        let mut map: BTreeMap<(i64, i64), GQ> = BTreeMap::new();
        let mut min_shift = Q::zero();
        for (a, s, c) in self.terms() {
            let turn = mu * s;
            let quarter = turn * 4;
            if !quarter.is_integer() {
                return Err(Error::NonGaussianPhase(fmt_q(&turn)));
            }
            let phase = GQ::i_pow(quarter.to_integer());
            let shift = lambda * s;
            let a_new = a + shift;
            let key = ((a_new * qd).to_integer(), (s * zd).to_integer());
            map.insert(key, &phase * c);
            for edge in [s - 1, s + 1] {
                let sh = lambda * edge;
                if sh < min_shift {
                    min_shift = sh;
                }
            }
            if shift < min_shift {
                min_shift = shift;
            }
        }
        if self.terms.is_empty() && !lambda.is_zero() {
            min_shift = -lambda.abs();
        }
        let prec = shift_prec(self.prec, min_shift);
        Ok(Self::from_raw(qd, zd, map, prec))
    }

    /// Sub-series with ζ-exponent exactly `s`, with `ζ` removed.
    pub fn extract_zeta(&self, s: Q) -> Self {
        let zs = s * self.z_den;
        let mut out = BTreeMap::new();
        if zs.is_integer() {
            let zs = zs.to_integer();
            for (&(a, z), c) in &self.terms {
                if z == zs {
                    out.insert((a, 0), c.clone());
                }
            }
        }
        Self::from_raw(self.q_den, 1, out, self.prec)
    }

    /// Distinct ζ-exponents present, ascending.
    pub fn zeta_support(&self) -> Vec<Q> {
        let mut v: Vec<i64> = self.terms.keys().map(|k| k.1).collect();
        v.sort_unstable();
        v.dedup();
        v.into_iter().map(|s| Q::new(s, self.z_den)).collect()
    }

    /// `ζ ↦ ζ^{-1}`.
    pub fn reflect_zeta(&self) -> Self {
        let terms = self.terms.iter().map(|(&(a, s), c)| ((a, -s), c.clone())).collect();
        Self::from_raw(self.q_den, self.z_den, terms, self.prec)
    }

    /// Sets `ζ = 1`, collapsing each q-slice to one coefficient.
    pub fn at_zeta_one(&self) -> Self {
        let mut out: BTreeMap<(i64, i64), GQ> = BTreeMap::new();
        for (&(a, _), c) in &self.terms {
            *out.entry((a, 0)).or_default() += c;
        }
        Self::from_raw(self.q_den, 1, out, self.prec)
    }

    /// Errors with `WindowTooSmall` if any ζ-exponent exceeds `window` in absolute value.
    pub fn check_window(&self, window: i64) -> Result<()> {
        for (a, s, _) in self.terms() {
            if s.abs() > Q::from_integer(window) {
                return Err(Error::WindowTooSmall { q: fmt_q(&a), exponent: fmt_q(&s), window });
            }
        }
        Ok(())
    }

    /// Drops terms with `|ζ-exponent| > window`.
    pub fn window(&self, window: i64) -> Self {
        let lim = Q::from_integer(window);
        let terms = self
            .terms
            .iter()
            .filter(|(&(_, s), _)| Q::new(s, self.z_den).abs() <= lim)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        Self::from_raw(self.q_den, self.z_den, terms, self.prec)
    }

    /// Evaluates the truncated series at `q = e(τ)`, `ζ = e(z)` with `ζ^s := e(sz)`.
    pub fn eval(&self, tau: Complex64, z: Complex64) -> Complex64 {
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, s, c) in self.terms() {
            let e = two_pi_i * (tau * crate::rational::to_f64(&a) + z * crate::rational::to_f64(&s));
            acc += c.to_complex() * e.exp();
        }
        acc
    }

    /// First coefficient (lexicographic in `(q, ζ)`) where `self` and `other`
    /// differ among exponents below `upto`.
    pub fn first_difference(&self, other: &Self, upto: Q) -> Option<(Q, Q, GQ, GQ)> {
        let mut keys: Vec<(Q, Q)> = self
            .terms()
            .map(|(a, s, _)| (a, s))
            .chain(other.terms().map(|(a, s, _)| (a, s)))
            .filter(|(a, _)| *a < upto)
            .collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find_map(|(a, s)| {
            let l = self.coeff(a, s);
            let r = other.coeff(a, s);
            (l != r).then_some((a, s, l, r))
        })
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            q_den: self.q_den,
            z_den: self.z_den,
            prec: match self.prec {
                Some(p) => fmt_q(&p),
                None => "inf".into(),
            },
            terms: self
                .terms
                .iter()
                .map(|(&(qn, zn), c)| {
                    let p = c.to_pair();
                    TermJson { qn, zn, re: p.re, im: p.im }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        if j.q_den <= 0 || j.z_den <= 0 {
            return Err(Error::Parse("denominators must be positive".into()));
        }
        let prec = if j.prec == "inf" { None } else { Some(parse_q(&j.prec)?) };
        let mut map = BTreeMap::new();
        for t in &j.terms {
            let c = GQ::from_pair(&crate::gaussian::ValuePair { re: t.re.clone(), im: t.im.clone() })?;
            map.insert((t.qn, t.zn), c);
        }
        Ok(Self::from_raw(j.q_den, j.z_den, map, prec))
    }
}

/// Smallest integer numerator (over `qd`) that is `≥ p`: stored `qn` must be `< q_cut`.
fn q_cut(p: Q, qd: i64) -> i64 {
    (p * qd).ceil().to_integer()
}

fn product_prec(a: &QZSeries, b: &QZSeries) -> Prec {
    let va = a.valuation_bound();
    let vb = b.valuation_bound();
    let left = match (a.prec, vb) {
        (None, _) => None,
        (Some(_), None) => None,
        (Some(p), Some(v)) => Some(p + v),
    };
    let right = match (b.prec, va) {
        (None, _) => None,
        (Some(_), None) => None,
        (Some(p), Some(v)) => Some(p + v),
    };
    let both_zero = va.is_none() || vb.is_none();
    if both_zero {
        // an exact zero factor makes the product exactly zero
        return None;
    }
    min_prec(left, right)
}

/// Bit-stable JSON form with terms sorted by `(qn, zn)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub q_den: i64,
    pub z_den: i64,
    pub prec: String,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub qn: i64,
    pub zn: i64,
    pub re: String,
    pub im: String,
}

impl Serialize for QZSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QZSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SeriesJson::deserialize(d)?;
        QZSeries::from_json(&j).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for QZSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QZSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (a, s, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if !a.is_zero() {
                write!(f, "·q^{a}")?;
            }
            if !s.is_zero() {
                write!(f, "·ζ^{s}")?;
            }
        }
        match self.prec {
            Some(p) => write!(f, " + O(q^{p})"),
            None => Ok(()),
        }
    }
}

/// Binomial coefficient as a big rational.
pub fn binomial(n: i64, k: i64) -> BigRational {
    if k < 0 || k > n {
        return BigRational::zero();
    }
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

pub fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::from(1);
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    BigRational::from_integer(acc)
}

/// `1/n!` as a big rational.
pub fn inv_factorial(n: u32) -> BigRational {
    let f = factorial(n);
    BigRational::new(f.denom().clone(), f.numer().clone())
}

/// `(a; q)_n` for the base monomial `c·q^α·ζ^s`; `length = None` is the infinite product.
pub fn pochhammer(
    base_q_exp: Q,
    base_z_exp: Q,
    base_coeff: &GQ,
    length: Option<u64>,
    precision: SeriesPrecision,
) -> Result<QZSeries> {
    let p = precision.target();
    match length {
        Some(n) => {
            let neg: Q = (0..n).map(|j| base_q_exp + Q::from_integer(j as i64)).filter(|e| *e < Q::zero()).sum();
            let mut acc = QZSeries::one(Some(p - neg));
            for j in 0..n {
                let e = base_q_exp + Q::from_integer(j as i64);
                if e >= p - neg {
                    break;
                }
                acc = acc.mul_binomial_exact(base_coeff, e, base_z_exp);
            }
            Ok(acc.truncate(p))
        }
        None => {
            if base_q_exp < Q::zero() {
                return Err(Error::Divergent(format!("base q-exponent {} is negative", fmt_q(&base_q_exp))));
            }
            let mut acc = QZSeries::one(Some(p));
            let mut j = 0i64;
            loop {
                let e = base_q_exp + Q::from_integer(j);
                if e >= p {
                    break;
                }
                acc = acc.mul_binomial_exact(base_coeff, e, base_z_exp);
                j += 1;
            }
            Ok(acc)
        }
    }
}

impl QZSeries {
    /// `self · (1 - c q^e ζ^s)` where the binomial is exact; keeps `self.prec + min(e, 0)`.
    fn mul_binomial_exact(&self, c: &GQ, e: Q, s: Q) -> Self {
        let shifted = self.mul_monomial(&-c, e, s);
        let mut out = self.add(&shifted.with_prec(None));
        let p = self.prec.map(|p| p + e.min(Q::zero()));
        out = out.with_prec(p);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn poly(terms: &[(i64, i64, i64)], prec: Prec) -> QZSeries {
        QZSeries::from_terms(terms.iter().map(|&(a, s, c)| (qi(a), qi(s), GQ::from_int(c))), prec)
    }

    #[test]
    fn difference_of_squares() {
        let a = poly(&[(0, 0, 1), (1, 0, 1)], Some(qi(5)));
        let b = poly(&[(0, 0, 1), (1, 0, -1)], Some(qi(5)));
        assert_eq!(a.mul(&b), poly(&[(0, 0, 1), (2, 0, -1)], Some(qi(5))));
    }

    #[test]
    fn additive_inverse_keeps_prec() {
        let a = poly(&[(0, 1, 3), (2, -1, 1)], Some(qi(4)));
        let z = a.add(&a.neg());
        assert!(z.is_empty());
        assert_eq!(z.prec(), Some(qi(4)));
    }

    #[test]
    fn half_zeta_exponents_merge() {
        let h = QZSeries::monomial(GQ::one(), qi(0), q(1, 2), None);
        let prod = h.mul(&h);
        assert_eq!(prod, QZSeries::monomial(GQ::one(), qi(0), qi(1), None));
        assert_eq!(prod.z_den(), 1);
    }

    #[test]
    fn product_precision_rule() {
        let a = poly(&[(1, 0, 1)], Some(qi(3)));
        let b = poly(&[(2, 0, 1)], Some(qi(10)));
        // min(3 + 2, 10 + 1)
        assert_eq!(a.mul(&b).prec(), Some(qi(5)));
    }

    #[test]
    fn geometric_inverse() {
        let a = poly(&[(0, 0, 1), (1, 0, -1)], Some(qi(6)));
        let inv = a.invert().unwrap();
        assert_eq!(inv, poly(&[(0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1), (4, 0, 1), (5, 0, 1)], Some(qi(6))));
    }

    #[test]
    fn monomial_inverse() {
        let m = QZSeries::monomial(-GQ::i(), q(1, 8), q(-1, 2), None);
        let inv = m.invert().unwrap();
        assert_eq!(inv, QZSeries::monomial(GQ::i(), q(-1, 8), q(1, 2), None));
    }

    #[test]
    fn non_unit_rejected() {
        let a = poly(&[(0, 0, 1), (0, 1, -1)], Some(qi(3)));
        assert!(matches!(a.invert(), Err(Error::NonUnit(_))));
        assert!(matches!(QZSeries::zero(Some(qi(2))).invert(), Err(Error::NonUnit(_))));
    }

    #[test]
    fn div_pole_geometric() {
        let one = QZSeries::one(Some(qi(5)));
        let g = one.div_pole(1, 1).unwrap();
        assert_eq!(g, poly(&[(0, 0, 1), (1, 1, 1), (2, 2, 1), (3, 3, 1), (4, 4, 1)], Some(qi(5))));
    }

    #[test]
    fn div_pole_polynomial() {
        let a = poly(&[(0, 0, 1), (0, 2, -1)], Some(qi(3)));
        assert_eq!(a.div_pole(0, 1).unwrap(), poly(&[(0, 0, 1), (0, 1, 1)], Some(qi(3))));
        let bad = poly(&[(0, 0, 1), (0, 2, 1)], Some(qi(3)));
        assert!(matches!(bad.div_pole(0, 1), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn div_pole_negative_k_round_trip() {
        let a = poly(&[(0, 0, 1), (1, 2, 3), (2, -1, -2)], Some(qi(8)));
        for k in [-2i64, -1] {
            for j in 1..=3u32 {
                let d = a.div_pole(k, j).unwrap();
                let mut back = d.clone();
                for _ in 0..j {
                    back = back.mul_binomial_exact(&GQ::one(), qi(k), qi(1));
                }
                let p = back.prec().unwrap();
                assert!(p >= qi(8) - qi(2) * (j as i64) - qi(1) || p >= qi(0));
                assert_eq!(back.first_difference(&a, p), None);
            }
        }
    }

    #[test]
    fn derivative_eigenterms() {
        let m = QZSeries::monomial(GQ::one(), q(1, 8), q(-3, 2), None);
        assert_eq!(m.apply_d(DVar::Tau), QZSeries::monomial(GQ::from_ratio(1, 8), q(1, 8), q(-3, 2), None));
        assert_eq!(m.apply_d(DVar::Z), QZSeries::monomial(GQ::from_ratio(-3, 2), q(1, 8), q(-3, 2), None));
        assert!(QZSeries::one(None).apply_d(DVar::Z).is_empty());
    }

    #[test]
    fn shift_phases() {
        let z = QZSeries::monomial(GQ::one(), qi(0), qi(1), None);
        assert_eq!(z.shift_z(qi(0), q(1, 2)).unwrap(), z.neg());
        let h = QZSeries::monomial(GQ::one(), qi(0), q(1, 2), None);
        assert_eq!(h.shift_z(qi(0), q(1, 2)).unwrap(), h.scale(&GQ::i()));
        let bad = QZSeries::monomial(GQ::one(), qi(0), q(1, 3), None);
        assert!(matches!(bad.shift_z(qi(0), q(1, 2)), Err(Error::NonGaussianPhase(_))));
    }

    #[test]
    fn extract_and_partition() {
        let a = poly(&[(0, 0, 1), (1, 1, 1)], Some(qi(4)));
        assert_eq!(a.extract_zeta(qi(1)), poly(&[(1, 0, 1)], Some(qi(4))));
        let mut rebuilt = QZSeries::zero(Some(qi(4)));
        for s in a.zeta_support() {
            rebuilt = rebuilt.add(&a.extract_zeta(s).mul_monomial(&GQ::one(), qi(0), s));
        }
        assert_eq!(rebuilt, a);
    }

    #[test]
    fn pochhammer_empty_and_pentagonal() {
        let p = SeriesPrecision::new(qi(15)).unwrap();
        assert_eq!(pochhammer(qi(1), qi(0), &GQ::one(), Some(0), p).unwrap(), QZSeries::one(Some(qi(15))));
        let euler = pochhammer(qi(1), qi(0), &GQ::one(), None, p).unwrap();
        let expect = poly(&[(0, 0, 1), (1, 0, -1), (2, 0, -1), (5, 0, 1), (7, 0, 1), (12, 0, -1)], Some(qi(15)));
        assert_eq!(euler, expect);
        assert!(matches!(pochhammer(qi(-1), qi(0), &GQ::one(), None, p), Err(Error::Divergent(_))));
    }

    #[test]
    fn json_round_trip() {
        let a = QZSeries::from_terms(
            [(q(1, 8), q(-1, 2), GQ::i()), (q(9, 8), q(3, 2), GQ::from_ratio(-2, 3))],
            Some(qi(3)),
        );
        let s = serde_json::to_string(&a).unwrap();
        let b: QZSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
