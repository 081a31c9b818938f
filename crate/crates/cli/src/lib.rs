//! Command-line front end: argument parsing, dispatch and output rendering.

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use haarwords::bounds::{
    bump_table, epsilon_net_check, g_derivative_bound_check, markov_check, BumpProfile, BumpRow, EpsilonNetRecord,
    GBoundRecord, MarkovRecord,
};
use haarwords::montecarlo::experiments::{
    mc_expect, mc_moment, oracle_suite, strong_convergence_experiment, OracleCase, StrongConvConfig, StrongConvReport,
};
use haarwords::montecarlo::norm::{NormMethod, NormOptions};
use haarwords::montecarlo::weyl::{dim_bounds_check, small_dim_classifier_check, weyl_dim, DimBoundRecord};
use haarwords::rwalk::{fit_log_slope, proper_power_stats, return_probability, spectral_radius, SpectralBracket};
use haarwords::rwalk::{PowerRow, SpectralOptions};
use haarwords::symgroup::koike_validation_sweep;
use haarwords::symgroup::KOIKE_TOLERANCE;
use haarwords::weingarten::wg_by_type;
use haarwords::wordint::{decay_check_word, exact_word_moment, expect_stable_character, interpolate_phi, DecayVerdict};
use haarwords::wordint::InterpolationReport;
use haarwords::{
    Dimension, Error, Group, HighestWeight, McEstimate, Partition, TraceMonomial, WalkMeasure, Word, WordPoly,
};

mod output;

pub use output::{csv_table, float, json};

/// Default cap on Monte Carlo samples; override with `HAARWORDS_MAX_SAMPLES`.
pub const DEFAULT_MAX_SAMPLES: u64 = 10_000_000;
/// Default cap on the dimension `n^(k+l)` of tensor operators; override with
/// `HAARWORDS_MAX_DIM`.
pub const DEFAULT_MAX_DIM: u64 = 1 << 24;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;

/// Everything a command produced, written by the caller in one go.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub status: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "haarwords", version, about = "Haar-unitary word integrals and related experiments")]
struct Cli {
    /// Output format; each subcommand has a default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GroupArg {
    U,
    Su,
}

impl From<GroupArg> for Group {
    fn from(g: GroupArg) -> Group {
        match g {
            GroupArg::U => Group::Unitary,
            GroupArg::Su => Group::SpecialUnitary,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Power,
    Lanczos,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact expectation of a stable character or trace monomial.
    ///
    /// CSV columns: word, lambda, mu, n, value, mc_mean, mc_std_error, seed
    Expect(ExpectArgs),
    /// Rebuilds E_n[s_{λ,μ}(w)] as a rational function of x = 1/n.
    Interp(WordArgs),
    /// Checks the order of vanishing of E at x = 0 against the decay rates.
    Decay(WordArgs),
    /// Operator-norm estimate of a polynomial in random unitaries.
    ///
    /// CSV columns (sweep): n, norm_estimate, reference, deviation, seed
    Strongconv(StrongArgs),
    /// Random-walk return and proper-power probabilities.
    ///
    /// CSV columns: n, return_prob, proper_power_prob, ci_low, ci_high, seed
    Rwalk(RwalkArgs),
    /// Analytic inequalities: g_L derivatives, bump Fourier decay, Markov.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Weingarten function Wg(L, σ) by cycle type.
    ///
    /// CSV columns: L, cycle_type, n, value, seed
    Wg(WgArgs),
    /// Dimension of an irreducible U(n) representation and its bounds.
    ///
    /// CSV columns: weight, n, dim, l1, log_dim, log_lower, log_upper, seed
    Dims(DimsArgs),
    /// Runs the exact-versus-sampled oracle suite and the expansion sweep.
    ///
    /// CSV columns: monomial, n, exact, mean, std_error, z_score, passed, seed
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct ExpectArgs {
    /// Word in letters a, b, ... (capitals are inverses); `e` is the identity.
    #[arg(long, conflicts_with = "monomial")]
    word: Option<String>,
    /// Product of traces such as "ab BA", evaluated instead of a character.
    #[arg(long)]
    monomial: Option<String>,
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long, default_value = "")]
    mu: String,
    #[arg(long, conflicts_with = "symbolic")]
    n: Option<usize>,
    /// Report the value as a rational function of n.
    #[arg(long)]
    symbolic: bool,
    /// Rank of the free group; inferred from the word when absent.
    #[arg(long)]
    rank: Option<usize>,
    /// Also estimate the value from this many Haar samples.
    #[arg(long)]
    mc_samples: Option<u64>,
    #[arg(long, value_enum, default_value = "u")]
    group: GroupArg,
}

#[derive(Args, Debug)]
struct WordArgs {
    #[arg(long)]
    word: String,
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long, default_value = "")]
    mu: String,
    #[arg(long)]
    rank: Option<usize>,
    /// First sampled dimension; defaults to the smallest admissible one.
    #[arg(long)]
    n_start: Option<usize>,
}

#[derive(Args, Debug)]
struct StrongArgs {
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, conflicts_with = "n_range")]
    n: Option<usize>,
    /// Sweep as start:end:step (inclusive).
    #[arg(long)]
    n_range: Option<String>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[arg(long, default_value = "a+A+b+B")]
    poly: String,
    #[arg(long, default_value_t = 1)]
    samples: u64,
    /// Known norm of the polynomial in the reduced C*-algebra.
    #[arg(long)]
    reference: Option<f64>,
    #[arg(long, value_enum, default_value = "lanczos")]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
}

#[derive(Args, Debug)]
struct RwalkArgs {
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// uniform-gen, lazy, point, or weights such as "a:1/4,A:1/4,e:1/2".
    #[arg(long, default_value = "uniform-gen")]
    measure: String,
    #[arg(long, default_value_t = 30)]
    steps: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Step range lo:hi for the fitted log-slope.
    #[arg(long, default_value = "10:30")]
    fit: String,
}

#[derive(Subcommand, Debug)]
enum BoundsCmd {
    /// Derivative bounds for g_L and 1/g_L on [0, 1/(2L²)].
    Gcheck(GcheckArgs),
    /// Fourier transform of the bump profile against its envelope.
    ///
    /// CSV columns: t, fourier, envelope, decay_bound, seed
    Bump(BumpArgs),
    /// Markov's inequality for one polynomial.
    Markov(MarkovArgs),
    /// Sup over [0,1] against the sup over the points 1/n, n >= N.
    Net(NetArgs),
}

#[derive(Args, Debug)]
struct GcheckArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long)]
    i: usize,
    #[arg(long, default_value_t = 200)]
    grid: usize,
}

#[derive(Args, Debug)]
struct BumpArgs {
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 10_000.0)]
    tmax: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args, Debug)]
struct MarkovArgs {
    /// Coefficients from the constant term up, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    b: f64,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug)]
struct NetArgs {
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
    #[arg(long = "N")]
    big_n: usize,
}

#[derive(Args, Debug)]
struct WgArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long)]
    cycle_type: String,
    /// Evaluate at this n; otherwise print the rational function.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct DimsArgs {
    /// Highest weight, weakly decreasing, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["lambda", "mu"])]
    weight: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Also check the small-dimension classifier with exponent A.
    #[arg(long = "A")]
    exponent: Option<f64>,
    #[arg(long, default_value_t = 12)]
    max_l1: usize,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 20_000)]
    samples: u64,
}

/// A failed command: message and exit status.
struct Failure {
    status: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = if e.is_violation() {
            EXIT_VIOLATION
        } else if e.is_resource() || matches!(e, Error::NonConvergence { .. }) {
            EXIT_RESOURCE
        } else {
            EXIT_VALIDATION
        };
        Failure { status, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { status: EXIT_VALIDATION, message: message.into() }
}

fn render_failure(message: String) -> Failure {
    Failure { status: EXIT_VALIDATION, message: format!("output error: {message}") }
}

type Res<T> = std::result::Result<T, Failure>;

/// A rendered document and the status to exit with.
struct Rendered {
    text: String,
    status: u8,
}

impl Rendered {
    fn ok(text: String) -> Rendered {
        Rendered { text, status: EXIT_OK }
    }
}

struct Caps {
    samples: u64,
    dim: u64,
}

impl Caps {
    fn from_env() -> Res<Caps> {
        Ok(Caps {
            samples: env_cap("HAARWORDS_MAX_SAMPLES", DEFAULT_MAX_SAMPLES)?,
            dim: env_cap("HAARWORDS_MAX_DIM", DEFAULT_MAX_DIM)?,
        })
    }

    fn check_samples(&self, samples: u64) -> Res<()> {
        if samples > self.samples {
            return Err(Failure {
                status: EXIT_RESOURCE,
                message: format!("{samples} samples exceed the cap of {}", self.samples),
            });
        }
        Ok(())
    }

    fn check_dim(&self, n: usize, power: usize) -> Res<()> {
        let dim = (n as u64).checked_pow(power as u32).unwrap_or(u64::MAX);
        if dim > self.dim {
            return Err(Failure {
                status: EXIT_RESOURCE,
                message: format!("operator dimension {n}^{power} exceeds the cap of {}", self.dim),
            });
        }
        Ok(())
    }
}

fn env_cap(name: &str, default: u64) -> Res<u64> {
    match std::env::var(name) {
        Err(_) => Ok(default),
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(invalid(format!("{name} must be a positive integer, got {s:?}"))),
        },
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns what should be written to each stream.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { status: EXIT_VALIDATION, stdout: String::new(), stderr: text }
            } else {
                Outcome { status: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    match dispatch(&cli) {
        Ok(r) => Outcome { status: r.status, stdout: r.text, stderr: String::new() },
        Err(f) => Outcome { status: f.status, stdout: String::new(), stderr: format!("error: {}\n", f.message) },
    }
}

fn dispatch(cli: &Cli) -> Res<Rendered> {
    let caps = Caps::from_env()?;
    let seed = cli.seed;
    let fmt = cli.format;
    match &cli.command {
        Command::Expect(a) => cmd_expect(a, fmt, seed, &caps),
        Command::Interp(a) => cmd_interp(a, fmt, seed),
        Command::Decay(a) => cmd_decay(a, fmt, seed),
        Command::Strongconv(a) => cmd_strongconv(a, fmt, seed, &caps),
        Command::Rwalk(a) => cmd_rwalk(a, fmt, seed, &caps),
        Command::Bounds(b) => match b {
            BoundsCmd::Gcheck(a) => cmd_gcheck(a, fmt, seed),
            BoundsCmd::Bump(a) => cmd_bump(a, fmt, seed),
            BoundsCmd::Markov(a) => cmd_markov(a, fmt, seed),
            BoundsCmd::Net(a) => cmd_net(a, fmt, seed),
        },
        Command::Wg(a) => cmd_wg(a, fmt, seed),
        Command::Dims(a) => cmd_dims(a, fmt, seed),
        Command::Selftest(a) => cmd_selftest(a, fmt, seed, &caps),
    }
}

fn to_json<T: Serialize>(v: &T) -> Res<Rendered> {
    output::json(v).map(Rendered::ok).map_err(render_failure)
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Res<Rendered> {
    output::csv_table(header, rows).map(Rendered::ok).map_err(render_failure)
}

fn json_only(fmt: Option<Format>, command: &str) -> Res<()> {
    if fmt == Some(Format::Csv) {
        return Err(invalid(format!("{command} only produces JSON")));
    }
    Ok(())
}

fn parse_word(text: &str, rank: Option<usize>) -> Res<Word> {
    Ok(match rank {
        Some(r) => Word::parse(text, r)?,
        None => Word::parse_auto_rank(text, 1)?,
    })
}

/// Smallest rank covering every letter in `text`.
fn letters_rank(text: &str) -> usize {
    text.chars()
        .filter(char::is_ascii_alphabetic)
        .map(|c| (c.to_ascii_lowercase() as u8 - b'a') as usize + 1)
        .max()
        .unwrap_or(1)
}

fn parse_f64_list(text: &str) -> Res<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: {s:?}"))))
        .collect()
}

fn parse_range(text: &str, what: &str) -> Res<(usize, usize, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Vec<usize> = parts
        .iter()
        .map(|s| s.trim().parse::<usize>().map_err(|_| invalid(format!("bad {what} {text:?}"))))
        .collect::<Res<_>>()?;
    match nums.as_slice() {
        [a, b] if a <= b => Ok((*a, *b, 1)),
        [a, b, s] if a <= b && *s > 0 => Ok((*a, *b, *s)),
        _ => Err(invalid(format!("bad {what} {text:?}; expected start:end[:step]"))),
    }
}

#[derive(Serialize)]
struct ExpectOut {
    command: &'static str,
    target: String,
    lambda: Option<String>,
    mu: Option<String>,
    n: Option<usize>,
    value: String,
    annotation: Option<String>,
    monte_carlo: Option<McEstimate>,
    seed: u64,
}

fn cmd_expect(a: &ExpectArgs, fmt: Option<Format>, seed: u64, caps: &Caps) -> Res<Rendered> {
    let dim = match (a.n, a.symbolic) {
        (Some(n), false) => Dimension::Numeric(n),
        (None, true) => Dimension::Symbolic,
        _ => return Err(invalid("give exactly one of --n and --symbolic")),
    };
    if let Some(s) = a.mc_samples {
        caps.check_samples(s)?;
        if a.n.is_none() {
            return Err(invalid("--mc-samples needs a numeric --n"));
        }
    }
    let group: Group = a.group.into();
    let out = if let Some(text) = &a.monomial {
        let m = TraceMonomial::parse(text, a.rank.unwrap_or_else(|| letters_rank(text)))?;
        let moment = exact_word_moment(&m, dim)?;
        let mc = match (a.mc_samples, a.n) {
            (Some(s), Some(n)) => Some(mc_moment(&m, n, s as usize, group, seed)?),
            _ => None,
        };
        ExpectOut {
            command: "expect",
            target: m.to_string(),
            lambda: None,
            mu: None,
            n: a.n,
            value: moment.value.to_string(),
            annotation: moment.annotation,
            monte_carlo: mc,
            seed,
        }
    } else {
        let text = a.word.as_deref().ok_or_else(|| invalid("give --word or --monomial"))?;
        let w = parse_word(text, a.rank)?;
        let lambda = Partition::parse(&a.lambda)?;
        let mu = Partition::parse(&a.mu)?;
        let moment = expect_stable_character(&lambda, &mu, &w, dim)?;
        let mc = match (a.mc_samples, a.n) {
            (Some(s), Some(n)) => Some(mc_expect(&lambda, &mu, &w, n, s as usize, group, seed)?),
            _ => None,
        };
        ExpectOut {
            command: "expect",
            target: w.to_string(),
            lambda: Some(lambda.to_string()),
            mu: Some(mu.to_string()),
            n: a.n,
            value: moment.value.to_string(),
            annotation: moment.annotation,
            monte_carlo: mc,
            seed,
        }
    };
    if fmt == Some(Format::Csv) {
        let row = vec![
            out.target.clone(),
            out.lambda.clone().unwrap_or_default(),
            out.mu.clone().unwrap_or_default(),
            out.n.map(|n| n.to_string()).unwrap_or_default(),
            out.value.clone(),
            output::opt_float(out.monte_carlo.as_ref().map(|m| m.mean_re)),
            output::opt_float(out.monte_carlo.as_ref().map(|m| m.std_error)),
            seed.to_string(),
        ];
        return to_csv(&["word", "lambda", "mu", "n", "value", "mc_mean", "mc_std_error", "seed"], &[row]);
    }
    to_json(&out)
}

#[derive(Serialize)]
struct InterpOut<'a> {
    command: &'static str,
    report: &'a InterpolationReport,
    function_of_x: String,
    seed: u64,
}

fn cmd_interp(a: &WordArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    json_only(fmt, "interp")?;
    let w = parse_word(&a.word, a.rank)?;
    let lambda = Partition::parse(&a.lambda)?;
    let mu = Partition::parse(&a.mu)?;
    let report = interpolate_phi(&lambda, &mu, &w, a.n_start)?;
    let function_of_x = report.as_function_of_x().display_in("x");
    to_json(&InterpOut { command: "interp", report: &report, function_of_x, seed })
}

#[derive(Serialize)]
struct DecayOut<'a> {
    command: &'static str,
    word: String,
    lambda: String,
    mu: String,
    verdict: &'a DecayVerdict,
    taylor: Vec<String>,
    seed: u64,
}

fn cmd_decay(a: &WordArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    json_only(fmt, "decay")?;
    let w = parse_word(&a.word, a.rank)?;
    let lambda = Partition::parse(&a.lambda)?;
    let mu = Partition::parse(&a.mu)?;
    let (report, verdict) = decay_check_word(&lambda, &mu, &w)?;
    to_json(&DecayOut {
        command: "decay",
        word: w.to_string(),
        lambda: lambda.to_string(),
        mu: mu.to_string(),
        verdict: &verdict,
        taylor: report.taylor.iter().map(|x| x.to_string()).collect(),
        seed,
    })
}

fn cmd_strongconv(a: &StrongArgs, fmt: Option<Format>, seed: u64, caps: &Caps) -> Res<Rendered> {
    caps.check_samples(a.samples)?;
    let poly = WordPoly::parse(&a.poly, a.r)?;
    let ns: Vec<usize> = match (&a.n, &a.n_range) {
        (Some(n), None) => vec![*n],
        (None, Some(r)) => {
            let (lo, hi, step) = parse_range(r, "--n-range")?;
            (lo..=hi).step_by(step).collect()
        }
        _ => return Err(invalid("give exactly one of --n and --n-range")),
    };
    let method = match a.method {
        MethodArg::Power => NormMethod::Power,
        MethodArg::Lanczos => NormMethod::Lanczos,
    };
    let mut reports: Vec<StrongConvReport> = Vec::with_capacity(ns.len());
    for &n in &ns {
        caps.check_dim(n, a.k + a.l)?;
        let cfg = StrongConvConfig {
            r: a.r,
            n,
            k: a.k,
            l: a.l,
            poly: poly.clone(),
            samples: a.samples as usize,
            seed,
            reference: a.reference,
            norm: NormOptions { tol: a.tol, max_iter: a.max_iter, method, seed, ..NormOptions::default() },
        };
        reports.push(strong_convergence_experiment(&cfg)?);
    }
    let sweep = a.n_range.is_some();
    if fmt == Some(Format::Csv) || (sweep && fmt.is_none()) {
        let rows: Vec<Vec<String>> = reports
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    output::float(r.norm_estimate),
                    output::float(r.reference),
                    output::float(r.deviation),
                    seed.to_string(),
                ]
            })
            .collect();
        return to_csv(&["n", "norm_estimate", "reference", "deviation", "seed"], &rows);
    }
    if sweep {
        to_json(&reports)
    } else {
        to_json(&reports[0])
    }
}

#[derive(Serialize)]
struct RwalkOut {
    command: &'static str,
    r: usize,
    measure: String,
    steps: usize,
    samples: u64,
    rows: Vec<PowerRow>,
    return_prob_exact: Vec<String>,
    fit_range: (usize, usize),
    log_slope: Option<f64>,
    spectral: Option<SpectralBracket>,
    log_spectral_lower: Option<f64>,
    log_spectral_upper: Option<f64>,
    seed: u64,
}

fn cmd_rwalk(a: &RwalkArgs, fmt: Option<Format>, seed: u64, caps: &Caps) -> Res<Rendered> {
    caps.check_samples(a.samples)?;
    let mu = WalkMeasure::parse(&a.measure, a.r)?;
    let table = proper_power_stats(&mu, a.steps, a.samples, seed)?;
    if fmt != Some(Format::Json) {
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|row| {
                vec![
                    row.n.to_string(),
                    output::opt_float(row.return_prob),
                    output::float(row.proper_power_prob),
                    output::float(row.ci_low),
                    output::float(row.ci_high),
                    seed.to_string(),
                ]
            })
            .collect();
        return to_csv(&["n", "return_prob", "proper_power_prob", "ci_low", "ci_high", "seed"], &rows);
    }
    let (lo, hi, _) = parse_range(&a.fit, "--fit")?;
    let mut exact = Vec::new();
    for n in 1..=a.steps {
        match return_probability(&mu, n) {
            Ok(p) => exact.push(p.exact.to_string()),
            Err(e) if e.is_resource() => break,
            Err(e) => return Err(e.into()),
        }
    }
    let spectral = if mu.symmetric { Some(spectral_radius(&mu, &SpectralOptions::default())?) } else { None };
    to_json(&RwalkOut {
        command: "rwalk",
        r: a.r,
        measure: a.measure.clone(),
        steps: a.steps,
        samples: a.samples,
        log_slope: fit_log_slope(&table, lo, hi),
        log_spectral_lower: spectral.as_ref().map(|s| s.lower.ln()),
        log_spectral_upper: spectral.as_ref().map(|s| s.upper.ln()),
        rows: table.rows,
        return_prob_exact: exact,
        fit_range: (lo, hi),
        spectral,
        seed,
    })
}

#[derive(Serialize)]
struct WithSeed<T: Serialize> {
    command: &'static str,
    #[serde(flatten)]
    record: T,
    seed: u64,
}

fn cmd_gcheck(a: &GcheckArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    json_only(fmt, "bounds gcheck")?;
    let record: GBoundRecord = g_derivative_bound_check(a.l, a.i, a.grid)?;
    to_json(&WithSeed { command: "bounds gcheck", record, seed })
}

#[derive(Serialize)]
struct BumpOut {
    command: &'static str,
    profile: BumpProfile,
    rows: Vec<BumpRow>,
    seed: u64,
}

fn cmd_bump(a: &BumpArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    let profile = BumpProfile::new(a.eps)?;
    let rows = bump_table(&profile, a.tmax, a.points)?;
    if fmt == Some(Format::Json) {
        return to_json(&BumpOut { command: "bounds bump", profile, rows, seed });
    }
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                output::float(r.t),
                output::float(r.fourier),
                output::float(r.envelope),
                output::float(r.decay_bound),
                seed.to_string(),
            ]
        })
        .collect();
    to_csv(&["t", "fourier", "envelope", "decay_bound", "seed"], &rows)
}

fn cmd_markov(a: &MarkovArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    json_only(fmt, "bounds markov")?;
    let coeffs = parse_f64_list(&a.coeffs)?;
    let record: MarkovRecord = markov_check(&coeffs, a.k, a.a, a.b, a.grid)?;
    to_json(&WithSeed { command: "bounds markov", record, seed })
}

fn cmd_net(a: &NetArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    json_only(fmt, "bounds net")?;
    let coeffs = parse_f64_list(&a.coeffs)?;
    let record: EpsilonNetRecord = epsilon_net_check(&coeffs, a.big_n)?;
    to_json(&WithSeed { command: "bounds net", record, seed })
}

#[derive(Serialize)]
struct WgOut {
    command: &'static str,
    #[serde(rename = "L")]
    l: usize,
    cycle_type: String,
    n: Option<usize>,
    value: String,
    seed: u64,
}

fn cmd_wg(a: &WgArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    let rho = Partition::parse(&a.cycle_type)?;
    if rho.size() != a.l {
        return Err(invalid(format!("cycle type {rho} is not a partition of L = {}", a.l)));
    }
    let f = wg_by_type(a.l, &rho)?;
    let value = match a.n {
        None => f.to_string(),
        Some(n) => {
            if n == 0 {
                return Err(invalid("n must be positive"));
            }
            let x = num_rational::BigRational::from_integer(n.into());
            f.eval(&x).ok_or_else(|| invalid(format!("Wg has a pole at n = {n}")))?.to_string()
        }
    };
    let out = WgOut { command: "wg", l: a.l, cycle_type: a.cycle_type.clone(), n: a.n, value, seed };
    if fmt == Some(Format::Csv) {
        let row = vec![
            out.l.to_string(),
            out.cycle_type.clone(),
            out.n.map(|n| n.to_string()).unwrap_or_default(),
            out.value.clone(),
            seed.to_string(),
        ];
        return to_csv(&["L", "cycle_type", "n", "value", "seed"], &[row]);
    }
    to_json(&out)
}

#[derive(Serialize)]
struct DimsOut {
    command: &'static str,
    dim: String,
    bounds: DimBoundRecord,
    classifier_below_threshold: Option<usize>,
    seed: u64,
}

fn cmd_dims(a: &DimsArgs, fmt: Option<Format>, seed: u64) -> Res<Rendered> {
    let weight = if let Some(w) = &a.weight {
        let v: Vec<i64> = w
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|_| invalid(format!("bad weight entry {s:?}"))))
            .collect::<Res<_>>()?;
        if let Some(n) = a.n {
            if n != v.len() {
                return Err(invalid(format!("weight has {} entries but n = {n}", v.len())));
            }
        }
        HighestWeight::new(v)?
    } else {
        let n = a.n.ok_or_else(|| invalid("--lambda/--mu need --n"))?;
        let lambda = Partition::parse(a.lambda.as_deref().unwrap_or(""))?;
        let mu = Partition::parse(a.mu.as_deref().unwrap_or(""))?;
        HighestWeight::from_pair(&lambda, &mu, n)?
    };
    let bounds = dim_bounds_check(&weight)?;
    let classifier = match a.exponent {
        Some(e) => Some(small_dim_classifier_check(weight.n(), e, a.max_l1)?),
        None => None,
    };
    let out = DimsOut {
        command: "dims",
        dim: weyl_dim(&weight).to_string(),
        bounds,
        classifier_below_threshold: classifier,
        seed,
    };
    if fmt == Some(Format::Csv) {
        let b = &out.bounds;
        let w: Vec<String> = b.weight.iter().map(|x| x.to_string()).collect();
        let row = vec![
            w.join(","),
            b.n.to_string(),
            out.dim.clone(),
            b.l1.to_string(),
            output::float(b.log_dim),
            output::float(b.log_lower),
            output::float(b.log_upper),
            seed.to_string(),
        ];
        return to_csv(&["weight", "n", "dim", "l1", "log_dim", "log_lower", "log_upper", "seed"], &[row]);
    }
    to_json(&out)
}

#[derive(Serialize)]
struct SelftestOut {
    command: &'static str,
    cases: Vec<OracleCase>,
    expansion_max_error: Option<f64>,
    expansion_tolerance: f64,
    failures: Vec<String>,
    passed: bool,
    seed: u64,
}

fn cmd_selftest(a: &SelftestArgs, fmt: Option<Format>, seed: u64, caps: &Caps) -> Res<Rendered> {
    caps.check_samples(a.samples)?;
    let cases = oracle_suite(a.samples as usize, seed)?;
    let mut failures: Vec<String> =
        cases.iter().filter(|c| !c.passed).map(|c| format!("{} at n = {}", c.monomial, c.n)).collect();
    let expansion = match koike_validation_sweep() {
        Ok(err) => Some(err),
        Err(e) if e.is_violation() => {
            failures.push(e.to_string());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let passed = failures.is_empty();
    let status = if passed { EXIT_OK } else { EXIT_VIOLATION };
    let rendered = if fmt == Some(Format::Csv) {
        let rows: Vec<Vec<String>> = cases
            .iter()
            .map(|c| {
                vec![
                    c.monomial.clone(),
                    c.n.to_string(),
                    c.exact.clone(),
                    output::float(c.estimate.mean_re),
                    output::float(c.estimate.std_error),
                    output::float(c.z_score),
                    c.passed.to_string(),
                    seed.to_string(),
                ]
            })
            .collect();
        to_csv(&["monomial", "n", "exact", "mean", "std_error", "z_score", "passed", "seed"], &rows)?
    } else {
        to_json(&SelftestOut {
            command: "selftest",
            cases,
            expansion_max_error: expansion,
            expansion_tolerance: KOIKE_TOLERANCE,
            failures,
            passed,
            seed,
        })?
    };
    Ok(Rendered { text: rendered.text, status })
}
