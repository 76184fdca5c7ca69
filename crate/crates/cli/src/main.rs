//! `mjf`: command-line front end to `mjf-core`.
//!
//! Exit codes: 0 on success or pass, 1 on a failed verification or a numeric
//! breakdown, 2 on usage errors and violated preconditions.

mod args;

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::Parser;
use mjf_core::decomposition::{kac_wakimoto_laurent, rank_crank_check, thm1_rhs_exact, thm2_rhs_exact, verify_cor12};
use mjf_core::numerics::quantum::geometric_ts;
use mjf_core::numerics::{
    cocycle_probe, fourier_quadrature, probe_csv, verify_thm2_numeric, CocycleProbe, EvalContext, ProbeRow,
    QuadratureSpec, RadialTarget,
};
use mjf_core::rational::{fmt_q, q, qi};
use mjf_core::report::{csv_field, fmt_complex, report_emit, OutputFormat};
use mjf_core::special::partial_theta::partial_theta;
use mjf_core::special::partitions::{crank_rank, CrankOrRank};
use mjf_core::special::theta::{eta_and_d, theta_series, theta_shifted_half, theta_sum_form};
use mjf_core::suites::{run_suite, SuiteParams};
use mjf_core::{Error, QZSeries, SeriesPrecision, ValuePair, VerificationReport};
use serde_json::json;

use args::{Cli, Command, ExpandArgs, FourierArgs, Function, KwArgs, Output, ProbeArgs, ProbeFunction, VerifyArgs};

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(_) | Error::Parse(_) | Error::WindowTooSmall { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// Rendered output and whether every check in it passed.
struct Rendered {
    text: String,
    passed: bool,
}

impl Rendered {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads.unwrap_or(0));
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(r) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(r.text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            if r.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Rendered, Failure> {
    let out = |default: Output| cli.output.unwrap_or(default);
    match &cli.command {
        Command::Expand(a) => Ok(Rendered::ok(emit_series(&expand(a)?, out(Output::Json)))),
        Command::Laurent(a) => laurent(a, out(Output::Json)),
        Command::Decompose(a) => decompose(a, out(Output::Json)),
        Command::Fourier(a) => fourier(a, out(Output::Json)),
        Command::Verify(a) => verify(a, out(Output::Text)),
        Command::RankCrank(a) => {
            let (r, _) = rank_crank_check(SeriesPrecision::new(a.precision)?, a.window)?;
            Ok(reports(&[r], out(Output::Text)))
        }
        Command::QuantumProbe(a) => quantum_probe(a, out(Output::Csv)),
    }
}

fn format_of(o: Output) -> OutputFormat {
    match o {
        Output::Json => OutputFormat::Json,
        Output::Csv => OutputFormat::Csv,
        Output::Text => OutputFormat::Text,
    }
}

fn reports(rs: &[VerificationReport], o: Output) -> Rendered {
    Rendered { text: report_emit(rs, format_of(o)), passed: rs.iter().all(|r| r.passed()) }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn series_rows(s: &QZSeries, prefix: &str, out: &mut String) {
    for (a, b, c) in s.terms() {
        let p = c.to_pair();
        let _ = writeln!(out, "{prefix}{},{},{},{}", fmt_q(&a), fmt_q(&b), p.re, p.im);
    }
}

fn emit_series(s: &QZSeries, o: Output) -> String {
    match o {
        Output::Json => pretty(s),
        Output::Csv => {
            let mut out = String::from("q_exp,z_exp,re,im\n");
            series_rows(s, "", &mut out);
            out
        }
        Output::Text => format!("{s}\n"),
    }
}

fn expand(a: &ExpandArgs) -> Result<QZSeries, Failure> {
    let p = SeriesPrecision::new(a.precision)?;
    let partial = a.function == Function::PartialTheta;
    for (flag, set) in [("--ell", a.ell.is_some()), ("--eps", a.eps.is_some()), ("--level", a.level.is_some())] {
        if set && !partial {
            return usage(format!("{flag} applies only to --function partial-theta"));
        }
    }
    if a.window.is_some() && !matches!(a.function, Function::Crank | Function::Rank) {
        return usage("--window applies only to --function crank or rank");
    }
    let window = a.window.unwrap_or_else(|| a.precision.ceil().to_integer().max(0) + 1);
    Ok(match a.function {
        Function::Theta => theta_series(p),
        Function::ThetaSum => theta_sum_form(p),
        Function::ThetaHalf => theta_shifted_half(p)?,
        Function::Eta => eta_and_d(p).0,
        Function::Crank => crank_rank(CrankOrRank::Crank, p, window)?,
        Function::Rank => crank_rank(CrankOrRank::Rank, p, window)?,
        Function::PartialTheta => {
            let (Some(ell), Some(eps), Some(level)) = (a.ell, a.eps, a.level) else {
                return usage("--function partial-theta needs --ell, --eps and --level");
            };
            partial_theta(ell, eps, level, p)?
        }
    })
}

fn laurent(a: &KwArgs, o: Output) -> Result<Rendered, Failure> {
    SeriesPrecision::new(a.precision)?;
    let ld = kac_wakimoto_laurent(a.mn, a.precision)?;
    let text = match o {
        Output::Json => pretty(&ld.to_json()),
        Output::Csv => {
            let mut out = String::from("n,q_exp,z_exp,re,im\n");
            for (i, d) in ld.d.iter().enumerate() {
                series_rows(d, &format!("{},", i + 1), &mut out);
            }
            out
        }
        Output::Text => {
            let mut out = format!("{} at z = 0, pole order {}\n", a.mn.label(), ld.order());
            for (i, d) in ld.d.iter().enumerate() {
                let _ = writeln!(out, "D_{} = {d}", i + 1);
            }
            out
        }
    };
    Ok(Rendered::ok(text))
}

fn decompose(a: &KwArgs, o: Output) -> Result<Rendered, Failure> {
    let precision = SeriesPrecision::new(a.precision)?;
    let terms = thm1_rhs_exact(a.mn, a.precision, a.precision)?;
    let report = verify_cor12(a.mn, precision)?;
    let passed = report.passed();
    let text = match o {
        Output::Json => {
            let ts: Vec<_> = terms
                .iter()
                .enumerate()
                .map(|(i, t)| json!({ "n": i + 1, "scale": t.scale, "appell": t.jet.to_json() }))
                .collect();
            pretty(&json!({
                "M": a.mn.m,
                "N": a.mn.n,
                "index": fmt_q(&a.mn.index()),
                "eps": a.mn.parity(),
                "terms": ts,
                "report": report,
            }))
        }
        Output::Csv => report_emit(&[report], OutputFormat::Csv),
        Output::Text => {
            let mut out = format!("{} = sum over n of s_n(q) * D_v^(n-1) F(z,v)|v=0\n", a.mn.label());
            for (i, t) in terms.iter().enumerate() {
                let _ = writeln!(out, "s_{} = {}", i + 1, t.scale);
                let _ =
                    writeln!(out, "    Appell jet order {}: {} terms, |k| <= {}", i, t.jet.terms.len(), t.jet.trunc_k);
            }
            out.push_str(&report_emit(&[report], OutputFormat::Text));
            out
        }
    };
    Ok(Rendered { text, passed })
}

fn fourier(a: &FourierArgs, o: Output) -> Result<Rendered, Failure> {
    let Some(tau) = a.tau else {
        let p = SeriesPrecision::new(a.precision.unwrap_or(qi(10)))?;
        return Ok(Rendered::ok(emit_series(&thm2_rhs_exact(a.mn, a.ell, p)?, o)));
    };
    let ctx = EvalContext::new(tau)?;
    let z0 = a.z0.unwrap_or((q(-1, 2), q(-1, 2)));
    let quotient = a.mn.quotient();
    let r = verify_thm2_numeric(&quotient, a.ell, z0, &ctx, a.tolerance.unwrap_or(1e-7))?;
    let zc = ctx.tau * mjf_core::rational::to_f64(&z0.0) + mjf_core::rational::to_f64(&z0.1);
    let quad = fourier_quadrature(&quotient, &QuadratureSpec::new(zc, a.ell), &ctx)?;
    let r = r.with("h", fmt_complex(quad.value)).with("deformed", quad.deformed);
    Ok(reports(&[r], o))
}

/// Flags each suite reads; anything else is rejected before running.
fn suite_flags(suite: &str) -> Result<&'static [&'static str], Failure> {
    Ok(match suite {
        "cor12" => &["precision", "MN", "mutants"],
        "thm1-numeric" => &["tau", "MN", "z0", "tolerance", "seed"],
        "thm2-numeric" => &["tau", "MN", "ell", "z0", "tolerance"],
        "lemma31" => &["tau", "tolerance", "seed"],
        "eq32" | "eq33" => &["precision", "ell"],
        "theta-decomp" => &["precision", "tau", "tolerance"],
        "sum-of-tails" | "rank-crank" => &["precision"],
        "quantum" => &[],
        other => {
            return usage(format!(
                "unknown suite '{other}' for --suite; known: {}",
                mjf_core::suites::SUITES.join(", ")
            ))
        }
    })
}

fn verify(a: &VerifyArgs, o: Output) -> Result<Rendered, Failure> {
    let allowed = suite_flags(&a.suite)?;
    let given = [
        ("precision", a.precision.is_some()),
        ("tau", a.tau.is_some()),
        ("MN", a.mn.is_some()),
        ("ell", a.ell.is_some()),
        ("z0", a.z0.is_some()),
        ("tolerance", a.tolerance.is_some()),
        ("seed", a.seed.is_some()),
        ("mutants", a.mutants),
    ];
    for (flag, set) in given {
        if set && !allowed.contains(&flag) {
            return usage(format!("--{flag} does not apply to suite {}", a.suite));
        }
    }
    if let Some(p) = a.precision {
        SeriesPrecision::new(p)?;
    }
    if let Some(t) = a.tolerance {
        if !(t > 0.0) {
            return usage("--tolerance must be positive");
        }
    }
    let mut params = SuiteParams {
        precision: a.precision,
        mn: a.mn,
        ell: a.ell,
        z0: a.z0,
        tolerance: a.tolerance,
        seed: a.seed.unwrap_or(0),
        mutants: a.mutants,
        timing: a.timing,
        ..SuiteParams::default()
    };
    if let Some(t) = a.tau {
        params.taus = vec![t];
    }
    Ok(reports(&run_suite(&a.suite, &params)?, o))
}

fn quantum_probe(a: &ProbeArgs, o: Output) -> Result<Rendered, Failure> {
    let target = match a.function {
        ProbeFunction::PartialTheta => {
            let (lambda, mu) = a.z0.unwrap_or((qi(0), qi(0)));
            RadialTarget::PartialTheta {
                ell: a.ell.unwrap_or(q(1, 2)),
                eps: a.eps.unwrap_or(1),
                level: a.level.unwrap_or(q(1, 2)),
                lambda,
                mu,
            }
        }
        other => {
            if a.ell.is_some() || a.eps.is_some() || a.level.is_some() || a.z0.is_some() {
                return usage("--ell, --eps, --level and --z0 apply only to --function partial-theta");
            }
            if other == ProbeFunction::Eta {
                RadialTarget::Eta
            } else {
                RadialTarget::KontsevichCompare
            }
        }
    };
    if !(a.t0 > 0.0) || a.levels < 2 {
        return usage("--t0 must be positive and --levels at least 2");
    }
    let probe = CocycleProbe {
        gamma: a.gamma,
        weight_k: a.weight,
        sample_xs: a.xs.0.clone(),
        approach_ts: geometric_ts(a.t0, a.levels),
    };
    let rows = cocycle_probe(&probe, &target, 2_000_000)?;
    let text = match o {
        Output::Csv => probe_csv(&rows),
        Output::Json => pretty(&rows.iter().map(row_json).collect::<Vec<_>>()),
        Output::Text => {
            let mut out = format!(
                "{:<8} {:>10} {:>24} {:>24} {:>12} {:>12}\n",
                "x", "t", "|value|", "|extrapolant|", "diff1", "diff2"
            );
            let opt = |d: Option<f64>| d.map_or("-".to_string(), |v| format!("{v:.4e}"));
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<8} {:>10.3e} {:>24.16e} {:>24.16e} {:>12} {:>12}",
                    csv_field(&fmt_q(&r.x)),
                    r.t,
                    r.value.norm(),
                    r.extrapolant.norm(),
                    opt(r.diff1),
                    opt(r.diff2)
                );
            }
            out
        }
    };
    Ok(Rendered::ok(text))
}

fn row_json(r: &ProbeRow) -> serde_json::Value {
    let opt = |d: Option<f64>| d.map(|v| format!("{v:.16e}"));
    json!({
        "x": fmt_q(&r.x),
        "t": format!("{:.16e}", r.t),
        "value": ValuePair::from_complex(r.value),
        "extrapolant": ValuePair::from_complex(r.extrapolant),
        "diff1": opt(r.diff1),
        "diff2": opt(r.diff2),
    })
}
