//! Crank and rank generating functions.

use crate::error::Result;
use crate::gaussian::GQ;
use crate::rational::{qi, Q};
use crate::series::{pochhammer, QZSeries, SeriesPrecision};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrankOrRank {
    Crank,
    Rank,
}

/// `𝒞 = (q)_∞ / ((ζq)_∞ (ζ^{-1}q)_∞)` or `ℛ = Σ_{n≥0} q^{n²} / ((ζq)_n (ζ^{-1}q)_n)`.
///
/// Both have finite ζ-support in every q-slice; `zeta_window` bounds the
/// allowed `|ζ-exponent|` and any excess is reported as `WindowTooSmall`.
pub fn crank_rank(which: CrankOrRank, precision: SeriesPrecision, zeta_window: i64) -> Result<QZSeries> {
    let p = precision.target();
    let out = match which {
        CrankOrRank::Crank => {
            let num = pochhammer(qi(1), qi(0), &GQ::one(), None, precision)?;
            let a = pochhammer(qi(1), qi(1), &GQ::one(), None, precision)?;
            let b = pochhammer(qi(1), qi(-1), &GQ::one(), None, precision)?;
            num.mul(&a.mul(&b).invert()?)
        }
        CrankOrRank::Rank => {
            let mut acc = QZSeries::zero(Some(p));
            let mut n = 0i64;
            while qi(n * n) < p {
                let rest = SeriesPrecision::new(p - qi(n * n))?;
                let len = Some(n as u64);
                let a = pochhammer(qi(1), qi(1), &GQ::one(), len, rest)?;
                let b = pochhammer(qi(1), qi(-1), &GQ::one(), len, rest)?;
                let term = a.mul(&b).invert()?.mul_monomial(&GQ::one(), qi(n * n), Q::from_integer(0));
                acc = acc.add(&term);
                n += 1;
            }
            acc
        }
    };
    let out = out.truncate(p);
    out.check_window(zeta_window)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn partitions(n: u32) -> Vec<Vec<u32>> {
        fn go(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if rem == 0 {
                out.push(cur.clone());
                return;
            }
            for part in (1..=rem.min(max)).rev() {
                cur.push(part);
                go(rem - part, part, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(n, n, &mut Vec::new(), &mut out);
        out
    }

    fn rank(p: &[u32]) -> i64 {
        p[0] as i64 - p.len() as i64
    }

    fn crank(p: &[u32]) -> i64 {
        let ones = p.iter().filter(|&&x| x == 1).count() as i64;
        if ones == 0 {
            p[0] as i64
        } else {
            p.iter().filter(|&&x| x as i64 > ones).count() as i64 - ones
        }
    }

    fn counts(n: u32, stat: fn(&[u32]) -> i64) -> BTreeMap<i64, i64> {
        let mut m = BTreeMap::new();
        for p in partitions(n) {
            *m.entry(stat(&p)).or_insert(0) += 1;
        }
        m
    }

    fn slice(s: &QZSeries, n: i64) -> BTreeMap<i64, i64> {
        s.terms()
            .filter(|t| t.0 == qi(n))
            .map(|(_, z, c)| (z.to_integer(), c.re.to_integer().try_into().unwrap()))
            .collect()
    }

    #[test]
    fn crank_low_orders() {
        let c = crank_rank(CrankOrRank::Crank, SeriesPrecision::new(qi(7)).unwrap(), 10).unwrap();
        assert_eq!(slice(&c, 1), BTreeMap::from([(-1, 1), (0, -1), (1, 1)]));
        assert_eq!(slice(&c, 2), BTreeMap::from([(-2, 1), (2, 1)]));
        for n in 2..=6 {
            assert_eq!(slice(&c, n as i64), counts(n, crank), "n = {n}");
        }
    }

    #[test]
    fn rank_low_orders() {
        let r = crank_rank(CrankOrRank::Rank, SeriesPrecision::new(qi(7)).unwrap(), 10).unwrap();
        assert_eq!(slice(&r, 0), BTreeMap::from([(0, 1)]));
        for n in 1..=6 {
            assert_eq!(slice(&r, n as i64), counts(n, rank), "n = {n}");
        }
    }

    #[test]
    fn window_is_enforced() {
        let err = crank_rank(CrankOrRank::Crank, SeriesPrecision::new(qi(6)).unwrap(), 3).unwrap_err();
        assert!(matches!(err, crate::error::Error::WindowTooSmall { .. }));
    }
}
