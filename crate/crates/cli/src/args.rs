use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "pseudotwin",
    version,
    about = "Experiments on primes of the form floor(iL(n))"
)]
pub struct Cli {
    /// Worker threads; defaults to PSEUDOTWIN_THREADS, then the core count.
    #[arg(long, global = true, env = "PSEUDOTWIN_THREADS")]
    pub threads: Option<usize>,

    /// CSV destination; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Li(x), or iL(y) and its floor.
    Lival(Lival),
    /// pi_hat(x) by the interval indicator.
    Pihat(Pihat),
    /// pi_hat at ascending checkpoints in one sieve sweep.
    PihatTable(PihatTable),
    /// Type I sum over (N, N1] against its bound.
    ExpsumLinear(ExpsumLinear),
    /// S0(q; k) against (L h q)^(1/2).
    ExpsumS0(ExpsumS0),
    /// Type II sum with arithmetic coefficients.
    ExpsumBilinear(ExpsumBilinear),
    /// Random trials of the Weyl-van der Corput inequality.
    WvdcFuzz(WvdcFuzz),
    /// Exact check of Vaughan's identity for v < n <= max-n.
    VaughanVerify(VaughanVerify),
    /// S1, S2, S3 = S4 + S5 against the direct prime sum.
    Decompose(Decompose),
    /// S = sum over 0 < h <= H of |sum Lambda(n) e(h Li(n))|.
    STotal(STotal),
    /// Sigma, its truncated Fourier model and truncation weight.
    Sigma(Sigma),
    /// Print or initialise a golden store.
    Goldens(Goldens),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionArg {
    Double,
    Dd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coeff {
    /// 1 everywhere.
    Ones,
    /// a(l) = sum over d | l, d > u of mu(d).
    A,
    /// b(r) = sum over lm = r, l <= v, m <= u of Lambda(l) mu(m).
    B,
    /// von Mangoldt.
    Lambda,
    /// Moebius.
    Mu,
}

/// Golden-store options shared by commands that record values.
#[derive(Args, Debug, Clone)]
pub struct GoldenArgs {
    /// Store to record results in.
    #[arg(long)]
    pub goldens: Option<PathBuf>,
    /// Allow replacing values already in the store.
    #[arg(long, requires = "goldens")]
    pub regenerate: bool,
}

/// Accepts plain integers and exact powers of ten such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let (mant, exp) = s
        .split_once(['e', 'E'])
        .ok_or_else(|| format!("not an integer: `{s}`"))?;
    let mant: u64 = mant.parse().map_err(|_| format!("not an integer: `{s}`"))?;
    let exp: u32 = exp.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
    10u64
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(mant))
        .ok_or_else(|| format!("`{s}` overflows"))
}

#[derive(Args, Debug)]
pub struct Lival {
    /// Evaluate Li(x).
    #[arg(long, conflicts_with = "y", required_unless_present = "y")]
    pub x: Option<f64>,
    /// Evaluate iL(y) and floor(iL(y)); y must be a non-negative integer for the floor.
    #[arg(long)]
    pub y: Option<f64>,
    /// Arithmetic for Li(x); iL is always polished in double-double.
    #[arg(long, value_enum, default_value = "double", conflicts_with = "y")]
    pub precision: PrecisionArg,
}

#[derive(Args, Debug)]
pub struct Pihat {
    #[arg(long, value_parser = parse_count)]
    pub x: u64,
    /// Also count through floor(iL(n)) and require agreement.
    #[arg(long)]
    pub cross_check: bool,
}

#[derive(Args, Debug)]
pub struct PihatTable {
    /// Comma-separated ascending checkpoints.
    #[arg(long, value_delimiter = ',', value_parser = parse_count, required = true)]
    pub checkpoints: Vec<u64>,
    #[command(flatten)]
    pub golden: GoldenArgs,
}

#[derive(Args, Debug)]
pub struct ExpsumLinear {
    #[arg(long, allow_hyphen_values = true)]
    pub h: i64,
    #[arg(long, default_value_t = 1)]
    pub ell: u64,
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    /// Upper end of the range; 2N when absent.
    #[arg(long, value_parser = parse_count)]
    pub n1: Option<u64>,
    /// Report the maximum over all N < N1 <= 2N.
    #[arg(long, conflicts_with = "n1")]
    pub sup: bool,
}

#[derive(Args, Debug)]
pub struct ExpsumS0 {
    #[arg(long)]
    pub h: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub q: i64,
    #[arg(long)]
    pub k: u64,
    #[arg(long)]
    pub l: u64,
}

#[derive(Args, Debug)]
pub struct ExpsumBilinear {
    /// Comma-separated positive frequencies.
    #[arg(long, value_delimiter = ',', required = true)]
    pub h: Vec<i64>,
    #[arg(long)]
    pub l: u64,
    #[arg(long)]
    pub k: u64,
    #[arg(long, value_enum, default_value = "a")]
    pub alpha: Coeff,
    #[arg(long, value_enum, default_value = "lambda")]
    pub beta: Coeff,
    /// Cut for a and b; ceil((2 max(L, K))^(1/2)) when absent.
    #[arg(long)]
    pub u: Option<u64>,
    #[arg(long)]
    pub v: Option<u64>,
}

#[derive(Args, Debug)]
pub struct WvdcFuzz {
    #[arg(long, default_value_t = 1000)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub max_k: usize,
}

#[derive(Args, Debug)]
pub struct VaughanVerify {
    #[arg(long)]
    pub u: u64,
    #[arg(long)]
    pub v: u64,
    #[arg(long, value_parser = parse_count)]
    pub max_n: u64,
}

#[derive(Args, Debug)]
pub struct Decompose {
    #[arg(long)]
    pub h: i64,
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    /// 2N when absent.
    #[arg(long, value_parser = parse_count)]
    pub n2: Option<u64>,
    /// floor(N^(5/11)) when absent.
    #[arg(long)]
    pub u: Option<u64>,
    #[arg(long)]
    pub v: Option<u64>,
}

#[derive(Args, Debug)]
pub struct STotal {
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    #[arg(long, value_parser = parse_count)]
    pub n2: Option<u64>,
    /// ceil(log^4 N) when absent.
    #[arg(long)]
    pub h_max: Option<u32>,
    #[command(flatten)]
    pub golden: GoldenArgs,
}

#[derive(Args, Debug)]
pub struct Sigma {
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    #[arg(long, value_parser = parse_count)]
    pub n1: Option<u64>,
    #[arg(long)]
    pub h_max: Option<u32>,
}

#[derive(Args, Debug)]
pub struct Goldens {
    #[arg(long)]
    pub goldens: PathBuf,
    /// Create an empty store.
    #[arg(long)]
    pub init: bool,
    /// With --init, overwrite an existing store.
    #[arg(long, requires = "init")]
    pub regenerate: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_powers_of_ten() {
        assert_eq!(parse_count("1000"), Ok(1000));
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("3E2"), Ok(300));
        assert!(parse_count("1.5e3").is_err());
        assert!(parse_count("1e30").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
