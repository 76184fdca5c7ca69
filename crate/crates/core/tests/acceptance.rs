//! One pass/fail line per acceptance criterion, with wall time against its budget.

mod common;

use std::time::{Duration, Instant};

use mjf_core::decomposition::{rank_crank_check, triple_product_check, verify_cor12_mutated, Mutation, Normalization};
use mjf_core::numerics::quantum::geometric_ts;
use mjf_core::numerics::{cocycle_probe, probe_csv, CocycleProbe, RadialTarget};
use mjf_core::rational::{q, qi};
use mjf_core::suites::{run_suite, SuiteParams, KW_GRID};
use mjf_core::{KacWakimotoSpec, SeriesPrecision, VerificationReport};
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn all_pass(reports: &[VerificationReport]) -> Outcome {
    match reports.iter().find(|r| !r.passed()) {
        None => Ok(format!("{} reports pass", reports.len())),
        Some(r) => Err(format!("{} failed: {:?}", r.id, r.first_discrepancy.as_ref().map(|d| (&d.q, &d.z)))),
    }
}

fn suite(name: &str, params: SuiteParams) -> Outcome {
    let rs = run_suite(name, &params).map_err(|e| format!("{e:?}"))?;
    all_pass(&rs)
}

fn prec(n: i64) -> SeriesPrecision {
    SeriesPrecision::new(qi(n)).unwrap()
}

fn c1() -> Outcome {
    all_pass(&[triple_product_check(prec(50)).map_err(|e| format!("{e:?}"))?])
}

fn c2() -> Outcome {
    let p = SuiteParams { precision: Some(qi(40)), ..SuiteParams::default() };
    let a = suite("eq32", p.clone())?;
    let b = suite("eq33", p)?;
    Ok(format!("eq32 {a}; eq33 {b}"))
}

fn c3() -> Outcome {
    let p = SuiteParams { precision: Some(qi(25)), ..SuiteParams::default() };
    let base = suite("cor12", p)?;
    for &(m, n) in &KW_GRID {
        let s = KacWakimotoSpec::new(m, n).unwrap();
        for mutation in [Mutation::PerturbD { n: n as usize, delta: 1 }, Mutation::FlipEps] {
            let r = verify_cor12_mutated(s, prec(25), mutation).map_err(|e| format!("{e:?}"))?;
            if r.passed() {
                return Err(format!("mutant {mutation:?} of ({m},{n}) was not caught"));
            }
        }
    }
    Ok(format!("{base}; 12 mutants caught"))
}

fn c4() -> Outcome {
    let (r, fit) = rank_crank_check(prec(20), 40).map_err(|e| format!("{e:?}"))?;
    all_pass(std::slice::from_ref(&r))?;
    if r.derived_constants.get("refit_orders_2_3_agree").map(String::as_str) != Some("true") {
        return Err("refit on orders 2,3 disagrees".into());
    }
    let show = |n: &Normalization| n.label();
    Ok(format!("C* = {} C, R* = {} R", show(&fit.crank), show(&fit.rank)))
}

fn c5() -> Outcome {
    suite("thm1-numeric", SuiteParams { seed: 2024, ..SuiteParams::default() })
}

fn c6() -> Outcome {
    suite("thm2-numeric", SuiteParams::default())
}

fn c7() -> Outcome {
    suite("lemma31", SuiteParams { seed: 2024, ..SuiteParams::default() })
}

fn c8() -> Outcome {
    suite("theta-decomp", SuiteParams { precision: Some(qi(30)), ..SuiteParams::default() })
}

fn c9() -> Outcome {
    let rs = run_suite("sum-of-tails", &SuiteParams { precision: Some(qi(30)), ..SuiteParams::default() })
        .map_err(|e| format!("{e:?}"))?;
    all_pass(&rs)?;
    let r = &rs[0];
    let fitted = r.derived_constants.get("fitted").cloned().unwrap_or_default();
    let printed = r.derived_constants.get("printed_form_matches_low_orders").cloned().unwrap_or_default();
    if printed != "false" {
        return Err("report does not record the printed-form mismatch".into());
    }
    Ok(format!("{fitted}; printed form (-1/2, (n^2-1)/24) rejected"))
}

fn c10() -> Outcome {
    let q_ok = suite("quantum", SuiteParams::default())?;
    let probe = CocycleProbe {
        gamma: [0, -1, 1, 0],
        weight_k: q(1, 2),
        sample_xs: vec![q(1, 5), q(1, 4), q(1, 3), q(2, 5), q(1, 2), q(2, 3), q(3, 4)],
        approach_ts: geometric_ts(0.002, 6),
    };
    let f = RadialTarget::PartialTheta { ell: q(1, 2), eps: 1, level: q(1, 2), lambda: qi(0), mu: qi(0) };
    let rows = cocycle_probe(&probe, &f, 2_000_000).map_err(|e| format!("{e:?}"))?;
    let csv = probe_csv(&rows);
    let finite = rows.iter().filter(|r| r.extrapolant.norm().is_finite()).count();
    Ok(format!("{q_ok}; cocycle table {} rows ({} finite), {} bytes", rows.len(), finite, csv.len()))
}

fn c11() -> Outcome {
    use common::*;
    let mut runner = TestRunner::new(Config { cases: 500, failure_persistence: None, ..Config::default() });
    let r = runner.run(&(series(), series(), series()), |(a, b, c)| ring_axioms(&a, &b, &c));
    r.map_err(|e| format!("ring axioms: {e}"))?;
    let r = runner.run(&(unit(), series()), |(u, a)| inversion_round_trip(&u, &a));
    r.map_err(|e| format!("inversion: {e}"))?;
    let r = runner.run(&(series(), series(), unit()), |(a, b, u)| precision_soundness(&a, &b, &u));
    r.map_err(|e| format!("precision soundness: {e}"))?;
    let r = runner.run(&(series(), series()), |(a, b)| leibniz(&a, &b));
    r.map_err(|e| format!("leibniz: {e}"))?;
    Ok("4 properties x 500 cases, zero failures".into())
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 11] = [
        ("triple product to O(q^50)", 10, c1),
        ("shifted partial theta identities to O(q^40)", 30, c2),
        ("Kac-Wakimoto decomposition to O(q^25) with mutants", 120, c3),
        ("rank-crank PDE to O(q^20), |zeta| <= 40", 120, c4),
        ("decomposition numerics, 1e-8", 60, c5),
        ("Fourier coefficients via quadrature, 1e-7", 120, c6),
        ("Appell-Lerch residue and elliptic law", 30, c7),
        ("theta decomposition of theta^2", 30, c8),
        ("sum of tails to O(q^30)", 30, c9),
        ("Kontsevich values, radial limits, cocycle probe", 30, c10),
        ("series engine properties", 60, c11),
    ];
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let (ok, detail) = match outcome {
            Ok(d) if in_time => (true, d),
            Ok(d) => (false, format!("{d}; over budget")),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} criterion {:>2}: {} [{:.2} s / {} s] {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            name,
            took.as_secs_f64(),
            budget,
            detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failures, failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
