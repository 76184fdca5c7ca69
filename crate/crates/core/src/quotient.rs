//! Theta quotients `ζ^c · ∏ θ(z + aτ + b)^e` and their pole inventories.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{floor_q, fmt_q, is_half_integer, Q};

/// The Kac–Wakimoto character `θ(z+1/2)^M / θ(z)^N` with `M < N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KacWakimotoSpec {
    pub m: u32,
    pub n: u32,
}

impl KacWakimotoSpec {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if n == 0 || m >= n {
            return Err(Error::Precondition(format!(
                "Kac-Wakimoto character needs 0 <= M < N with N >= 1, got M={m}, N={n}"
            )));
        }
        Ok(Self { m, n })
    }

    /// `m = (M - N)/2 < 0`.
    pub fn index(&self) -> Q {
        Q::new(self.m as i64 - self.n as i64, 2)
    }

    /// `ε(N) ≡ N (mod 2)`.
    pub fn parity(&self) -> u8 {
        (self.n % 2) as u8
    }

    /// Appell level `-m = (N - M)/2`.
    pub fn level(&self) -> Q {
        -self.index()
    }

    pub fn quotient(&self) -> JacobiQuotient {
        let mut factors = Vec::new();
        if self.m > 0 {
            factors.push(ThetaFactor::new(Q::zero(), Q::new(1, 2), self.m as i64));
        }
        factors.push(ThetaFactor::new(Q::zero(), Q::zero(), -(self.n as i64)));
        JacobiQuotient { factors }
    }

    pub fn label(&self) -> String {
        format!("{},{}", self.m, self.n)
    }
}

/// One factor `θ(z + shift_tau·τ + shift_one)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaFactor {
    pub shift_tau: Q,
    pub shift_one: Q,
    pub exponent: i64,
}

impl ThetaFactor {
    pub fn new(shift_tau: Q, shift_one: Q, exponent: i64) -> Self {
        Self { shift_tau, shift_one, exponent }
    }
}

/// `ζ^{Σ e·a} · ∏ θ(z + aτ + b)^e`.
///
/// The `ζ`-prefactor cancels the `q^{-λa}` factors that each shifted θ picks up
/// under `z ↦ z + λτ`, so every admissible quotient satisfies the elliptic law
/// with index `m = ½ Σ e` and the parity reported by [`JacobiQuotient::parity`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobiQuotient {
    pub factors: Vec<ThetaFactor>,
}

/// Poles of a quotient inside `P_{z0} = z0 + [0,1)τ + [0,1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleInventory {
    /// Base point `z0 = λτ + μ` as `(λ, μ)`.
    pub z0: (Q, Q),
    /// Pole positions `(λ, μ)` with their orders.
    pub representatives: Vec<((Q, Q), u32)>,
}

impl JacobiQuotient {
    pub fn new(factors: Vec<ThetaFactor>) -> Self {
        Self { factors }
    }

    /// `m = ½ Σ e`.
    pub fn index(&self) -> Q {
        Q::new(self.factors.iter().map(|f| f.exponent).sum(), 2)
    }

    /// Exponent of the ζ-prefactor, `Σ e·a`.
    pub fn zeta_power(&self) -> Q {
        self.factors.iter().map(|f| f.shift_tau * f.exponent).sum()
    }

    /// Parity ε of the elliptic law, or an error when the quotient does not
    /// satisfy any law of the form `(-1)^{2mμ+λε} e^{-2πim(λ²τ+2λz)}`.
    pub fn parity(&self) -> Result<u8> {
        let c = self.zeta_power();
        if !c.is_integer() {
            return Err(Error::Precondition(format!("zeta prefactor exponent {} is not an integer", fmt_q(&c))));
        }
        let twice_b: Q = self.factors.iter().map(|f| f.shift_one * f.exponent * 2).sum();
        if !twice_b.is_integer() {
            return Err(Error::Precondition("sum of e*b is not a half-integer".into()));
        }
        let total: i64 = self.factors.iter().map(|f| f.exponent).sum();
        Ok((total - twice_b.to_integer()).rem_euclid(2) as u8)
    }

    /// Zero/pole classes modulo `ℤτ + ℤ` with their net order
    /// (positive = pole order, negative = zero order).
    pub fn divisor(&self) -> BTreeMap<(Q, Q), i64> {
        let mut out: BTreeMap<(Q, Q), i64> = BTreeMap::new();
        for f in &self.factors {
            let key = (reduce_unit(-f.shift_tau), reduce_unit(-f.shift_one));
            *out.entry(key).or_default() -= f.exponent;
        }
        out.retain(|_, v| *v != 0);
        out
    }

    /// Pole classes with positive order, reduced into `[0,1)²`.
    pub fn pole_classes(&self) -> Vec<((Q, Q), u32)> {
        self.divisor().into_iter().filter(|(_, v)| *v > 0).map(|(k, v)| (k, v as u32)).collect()
    }

    /// Pole representatives inside `P_{z0}`; errors if a pole lies on `∂P_{z0}`.
    pub fn pole_inventory(&self, z0: (Q, Q)) -> Result<PoleInventory> {
        let mut reps = Vec::new();
        for ((lc, mc), order) in self.pole_classes() {
            let lam = lift_into(lc, z0.0);
            let mu = lift_into(mc, z0.1);
            if lam == z0.0 || mu == z0.1 {
                return Err(Error::Precondition(format!(
                    "pole at {}τ+{} lies on the boundary of P_z0",
                    fmt_q(&lam),
                    fmt_q(&mu)
                )));
            }
            reps.push(((lam, mu), order));
        }
        reps.sort();
        Ok(PoleInventory { z0, representatives: reps })
    }

    /// Order of vanishing of factor `f` at the point `(λ, μ)` (1 if it vanishes, else 0).
    pub fn factor_vanishes_at(f: &ThetaFactor, at: (Q, Q)) -> bool {
        (at.0 + f.shift_tau).is_integer() && (at.1 + f.shift_one).is_integer()
    }

    /// True when all factors are unshifted in τ and shifted by half-integers in 1.
    pub fn is_lattice_supported(&self) -> bool {
        self.factors.iter().all(|f| f.shift_tau.is_zero() && is_half_integer(&f.shift_one))
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| format!("th({}t+{})^{}", fmt_q(&f.shift_tau), fmt_q(&f.shift_one), f.exponent))
            .collect();
        parts.join("*")
    }
}

fn reduce_unit(x: Q) -> Q {
    x - Q::from_integer(floor_q(&x))
}

/// The unique `y ≡ x (mod 1)` with `base ≤ y < base + 1`.
fn lift_into(x: Q, base: Q) -> Q {
    let d = x - base;
    x - Q::from_integer(floor_q(&d))
}
