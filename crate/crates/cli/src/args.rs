use clap::{Args, Parser, Subcommand, ValueEnum};
use mjf_core::rational::parse_q;
use mjf_core::{KacWakimotoSpec, Q};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "mjf", version, about = "Exact and numeric checks for negative-index meromorphic Jacobi forms")]
pub struct Cli {
    /// Worker threads for suite cases (default: all cores).
    #[arg(long, global = true, value_parser = parse_threads)]
    pub threads: Option<usize>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub output: Option<Output>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Expand a named series to O(q^precision).
    Expand(ExpandArgs),
    /// Laurent coefficients D_{n,0} of a Kac-Wakimoto character at z = 0.
    Laurent(KwArgs),
    /// Appell-Lerch decomposition of a Kac-Wakimoto character, with its exact check.
    Decompose(KwArgs),
    /// Fourier coefficient h_ell, exactly or by quadrature at a given tau.
    Fourier(FourierArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Fit and verify the rank-crank PDE.
    RankCrank(RankCrankArgs),
    /// Tabulate cocycle smoothness indicators near the real line.
    QuantumProbe(ProbeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Function {
    Theta,
    ThetaSum,
    ThetaHalf,
    Eta,
    Crank,
    Rank,
    PartialTheta,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[arg(long, value_enum)]
    pub function: Function,
    #[arg(long, value_parser = parse_rational, default_value = "10")]
    pub precision: Q,
    /// Partial theta: ell.
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub ell: Option<Q>,
    /// Partial theta: epsilon in {0,1}.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub eps: Option<u8>,
    /// Partial theta: level M.
    #[arg(long, value_parser = parse_rational)]
    pub level: Option<Q>,
    /// Crank/rank: largest |zeta exponent| allowed.
    #[arg(long)]
    pub window: Option<i64>,
}

#[derive(Args, Debug)]
pub struct KwArgs {
    #[arg(long = "MN", value_parser = parse_mn)]
    pub mn: KacWakimotoSpec,
    #[arg(long, value_parser = parse_rational, default_value = "10")]
    pub precision: Q,
}

#[derive(Args, Debug)]
pub struct FourierArgs {
    #[arg(long = "MN", value_parser = parse_mn)]
    pub mn: KacWakimotoSpec,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub ell: Q,
    /// Exact series precision.
    #[arg(long, value_parser = parse_rational, conflicts_with = "tau")]
    pub precision: Option<Q>,
    /// Evaluate numerically at this tau instead of expanding.
    #[arg(long, value_parser = parse_tau, allow_hyphen_values = true)]
    pub tau: Option<Complex64>,
    /// Path start z0 = lam*tau + mu (numeric mode).
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, requires = "tau")]
    pub z0: Option<(Q, Q)>,
    #[arg(long, requires = "tau")]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    #[arg(long, value_parser = parse_rational)]
    pub precision: Option<Q>,
    #[arg(long, value_parser = parse_tau, allow_hyphen_values = true)]
    pub tau: Option<Complex64>,
    #[arg(long = "MN", value_parser = parse_mn)]
    pub mn: Option<KacWakimotoSpec>,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub ell: Option<Q>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub z0: Option<(Q, Q)>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also run corrupted inputs (cor12) and require each to fail.
    #[arg(long)]
    pub mutants: bool,
    /// Record per-case wall time (output is then no longer byte-stable).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct RankCrankArgs {
    #[arg(long, value_parser = parse_rational, default_value = "20")]
    pub precision: Q,
    #[arg(long, default_value_t = 40)]
    pub window: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeFunction {
    PartialTheta,
    Eta,
    Kontsevich,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long, value_enum, default_value = "partial-theta")]
    pub function: ProbeFunction,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub ell: Option<Q>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub eps: Option<u8>,
    #[arg(long, value_parser = parse_rational)]
    pub level: Option<Q>,
    /// Partial theta evaluated at z = lam*tau + mu.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub z0: Option<(Q, Q)>,
    /// Matrix a,b,c,d with ad - bc = 1.
    #[arg(long, value_parser = parse_gamma, allow_hyphen_values = true, default_value = "0,-1,1,0")]
    pub gamma: [i64; 4],
    #[arg(long, value_parser = parse_rational, default_value = "1/2")]
    pub weight: Q,
    /// Comma-separated sample points x.
    #[arg(long, value_parser = parse_xs, default_value = "1/5,1/4,1/3,2/5,1/2,2/3,3/4")]
    pub xs: Xs,
    #[arg(long, default_value_t = 0.002)]
    pub t0: f64,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
}

fn parse_rational(s: &str) -> Result<Q, String> {
    parse_q(s).map_err(|e| e.to_string())
}

fn parse_threads(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn split2(s: &str) -> Result<(&str, &str), String> {
    s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got {s:?}"))
}

fn parse_pair(s: &str) -> Result<(Q, Q), String> {
    let (a, b) = split2(s)?;
    Ok((parse_rational(a)?, parse_rational(b)?))
}

fn parse_tau(s: &str) -> Result<Complex64, String> {
    let (a, b) = split2(s)?;
    let re: f64 = a.trim().parse().map_err(|_| format!("bad real part {a:?}"))?;
    let im: f64 = b.trim().parse().map_err(|_| format!("bad imaginary part {b:?}"))?;
    if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
        return Err("tau must lie in the upper half-plane".into());
    }
    Ok(Complex64::new(re, im))
}

fn parse_mn(s: &str) -> Result<KacWakimotoSpec, String> {
    let (a, b) = split2(s)?;
    let m: u32 = a.trim().parse().map_err(|_| format!("bad M {a:?}"))?;
    let n: u32 = b.trim().parse().map_err(|_| format!("bad N {b:?}"))?;
    KacWakimotoSpec::new(m, n).map_err(|e| e.to_string())
}

fn parse_gamma(s: &str) -> Result<[i64; 4], String> {
    let v: Vec<i64> =
        s.split(',').map(|x| x.trim().parse().map_err(|_| format!("bad entry {x:?}"))).collect::<Result<_, _>>()?;
    <[i64; 4]>::try_from(v).map_err(|_| "expected four entries a,b,c,d".to_string())
}

#[derive(Clone, Debug)]
pub struct Xs(pub Vec<Q>);

fn parse_xs(s: &str) -> Result<Xs, String> {
    s.split(',').map(parse_rational).collect::<Result<_, _>>().map(Xs)
}
