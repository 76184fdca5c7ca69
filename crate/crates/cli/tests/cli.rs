use std::process::{Command, Output};

use mjf_core::report::{report_emit, OutputFormat};
use mjf_core::{QZSeries, VerificationReport};
use num_rational::Ratio;

fn mjf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mjf")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn theta_expansion_matches_golden_file() {
    let o = mjf(&["expand", "--function", "theta", "--precision", "10", "--output", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("expand_theta_p10.json"));
}

#[test]
fn theta_expansion_is_the_half_integer_sum() {
    // θ(z) = Σ_{ν ∈ 1/2+ℤ} e^{πiν} q^{ν²/2} ζ^ν, so ν = ±1/2, ..., ±7/2 below q^10
    let o = mjf(&["expand", "--function", "theta", "--precision", "10", "--output", "json"]);
    let s: QZSeries = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(s.prec(), Some(Ratio::from_integer(10)));
    let mut seen = 0;
    for (qe, ze, c) in s.terms() {
        let nu = ze;
        assert_eq!(qe, nu * nu / 2);
        // e^{πiν} = i^{2ν}
        let k = (nu * 2).to_integer().rem_euclid(4);
        let want = mjf_core::GQ::i_pow(k);
        assert_eq!(*c, want, "ν = {nu}");
        seen += 1;
    }
    assert_eq!(seen, 8);
}

#[test]
fn series_terms_are_sorted() {
    let o = mjf(&["expand", "--function", "crank", "--precision", "6", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let keys: Vec<(i64, i64)> =
        v["terms"].as_array().unwrap().iter().map(|t| (t["qn"].as_i64().unwrap(), t["zn"].as_i64().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(!keys.is_empty());
}

#[test]
fn eq33_report_matches_golden_file() {
    let o = mjf(&["verify", "--suite", "eq33", "--precision", "6", "--output", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("verify_eq33_p6.json"));
}

#[test]
fn cor12_pass_exits_zero() {
    let o = mjf(&["verify", "--suite", "cor12", "--MN", "0,3", "--precision", "25"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("cor12/M=0,N=3"));
    assert!(out.ends_with("passed 1 / failed 0 / total 1\n"));
}

#[test]
fn contract_violation_exits_two() {
    let o = mjf(&["verify", "--suite", "cor12", "--MN", "3,1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--MN"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let cases: [&[&str]; 6] = [
        &["verify", "--suite", "nope"],
        &["verify", "--suite", "lemma31", "--MN", "0,1"],
        &["verify", "--suite", "eq32", "--precision", "abc"],
        &["expand", "--function", "theta", "--ell", "1/2"],
        &["fourier", "--MN", "0,1", "--ell", "-1/2", "--z0", "0,0"],
        &["verify", "--suite", "cor12", "--threads", "0"],
    ];
    let flags = ["--suite", "--MN", "--precision", "--ell", "--z0", "--threads"];
    for (args, flag) in cases.iter().zip(flags) {
        let o = mjf(args);
        assert_eq!(code(&o), 2, "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
}

#[test]
fn precondition_errors_exit_two() {
    let o = mjf(&["fourier", "--MN", "0,1", "--ell", "0", "--tau", "0.13,1.04"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("m + ℤ"));
}

#[test]
fn failed_verification_exits_one_with_report() {
    let o = mjf(&["verify", "--suite", "thm2-numeric", "--MN", "0,1", "--tolerance", "1e-300", "--output", "json"]);
    assert_eq!(code(&o), 1);
    let rs: Vec<VerificationReport> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rs.len(), 9);
    assert!(rs.iter().any(|r| !r.passed()));
    assert!(rs.iter().filter(|r| !r.passed()).all(|r| r.first_discrepancy.is_some()));
}

#[test]
fn report_json_round_trips_through_the_emitter() {
    let o = mjf(&["verify", "--suite", "cor12", "--MN", "0,2", "--precision", "6", "--mutants", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rs: Vec<VerificationReport> = serde_json::from_str(&text).unwrap();
    assert_eq!(rs.len(), 4);
    assert_eq!(report_emit(&rs, OutputFormat::Json), text);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["verify", "--suite", "lemma31", "--seed", "7", "--output", "json"];
    let a = mjf(&args);
    let b = mjf(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    for suite in ["thm1-numeric", "eq32"] {
        let base = ["verify", "--suite", suite, "--output", "json"];
        let one = mjf(&[&base[..], &["--threads", "1"]].concat());
        let four = mjf(&[&base[..], &["--threads", "4"]].concat());
        assert_eq!(code(&one), 0, "{suite}");
        assert_eq!(one.stdout, four.stdout, "{suite}");
    }
}

#[test]
fn timing_fills_wall_ms() {
    let o = mjf(&["verify", "--suite", "sum-of-tails", "--precision", "10", "--timing", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let rs: Vec<VerificationReport> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rs.iter().all(|r| r.wall_ms.is_some()));
}

#[test]
fn quantum_probe_emits_csv_table() {
    let o = mjf(&["quantum-probe", "--xs", "1/4,1/3,1/2", "--levels", "4"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,t,value_re,value_im,extrapolant_re,extrapolant_im,diff1,diff2"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn csv_report_has_summary_comment() {
    let o = mjf(&["verify", "--suite", "quantum", "--output", "csv"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("id,status,checked_to,discrepancy_q,discrepancy_z\n"));
    assert!(out.trim_end().ends_with("# passed 9 / failed 0 / total 9"));
}

#[test]
fn laurent_and_decompose_agree_on_d() {
    let l = mjf(&["laurent", "--MN", "0,2", "--precision", "4"]);
    let d = mjf(&["decompose", "--MN", "0,2", "--precision", "4"]);
    assert_eq!(code(&l), 0);
    assert_eq!(code(&d), 0);
    let lv: serde_json::Value = serde_json::from_str(&stdout(&l)).unwrap();
    let dv: serde_json::Value = serde_json::from_str(&stdout(&d)).unwrap();
    assert_eq!(dv["report"]["status"], "pass");
    // s_2 = -D_2/1!
    let d2: QZSeries = serde_json::from_value(lv["D"][1].clone()).unwrap();
    let s2: QZSeries = serde_json::from_value(dv["terms"][1]["scale"].clone()).unwrap();
    assert_eq!(s2, d2.neg());
}
