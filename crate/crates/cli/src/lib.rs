//! The `arithdiff` command line.
//!
//! Summaries go to standard output; machine-readable JSON records go to the
//! file named by `--out`. Exit status: 0 success or PASS, 1 FAIL, 2 usage or
//! malformed input, 3 insufficient precision.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use arithdiff_core::{
    check_le1_bounds, compute_cm, delta_expansion, det_unit_certificate, evaluate_canonical,
    evaluate_local, expand, legendre_oracle, legendre_series_eval, represent_detailed,
    roundtrip_report, w_matrix, CanonicalSeries, Error, LegendreSeriesParams, LocalFunctionData,
    Outcome, PadicInt,
};
use clap::{Args, Parser, Subcommand};
use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "arithdiff", version, about = "Fermat-quotient calculus on the p-adic integers")]
pub struct Cli {
    /// Print more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Iterated Fermat quotient of a point.
    Delta {
        #[command(flatten)]
        field: Field,
        /// The point, an integer or `value/N`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 1)]
        iterations: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Expansion of δ^k(a + p^n u) and its valuation bound report.
    Expansion {
        #[command(flatten)]
        field: Field,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Disc level n.
        #[arg(short = 'n', long)]
        level: u32,
        /// Iterate order k.
        #[arg(short = 'k', long)]
        order: u32,
        /// Degree cap; defaults to the full degree p^k when that is small.
        #[arg(long)]
        cap: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// The p^m roots of δ^m.
    Cm {
        #[command(flatten)]
        level: Level,
        #[command(flatten)]
        out: Output,
    },
    /// The matrix W and its determinant certificate.
    Wmatrix {
        #[command(flatten)]
        level: Level,
        #[command(flatten)]
        out: Output,
    },
    /// Canonical series from per-disc local series.
    Represent {
        /// Local function data (JSON).
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Per-disc local series of a canonical series.
    Expand {
        /// Canonical series (JSON).
        #[arg(long = "in")]
        input: PathBuf,
        /// Working precision; defaults to the series precision plus m.
        #[arg(short = 'N', long)]
        precision: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate a canonical series or local data at a point.
    Eval {
        /// Canonical series or local function data (JSON).
        #[arg(long = "in", alias = "series")]
        input: PathBuf,
        /// The point as `value/N`, or `value` together with -N.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(short = 'N', long)]
        precision: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Check represent(expand(F)) against F.
    Roundtrip {
        #[arg(long = "in", alias = "series")]
        input: PathBuf,
        /// Precision handed to expand; defaults to the series precision plus m.
        #[arg(short = 'N', long)]
        precision: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// The Legendre symbol as a convergent series in a and δa.
    Legendre {
        #[arg(short, long)]
        prime: u64,
        #[arg(long, allow_hyphen_values = true)]
        at: i64,
        #[arg(short = 'N', long)]
        precision: u32,
        #[arg(long)]
        terms: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Randomized sweep of the expansion valuation bounds.
    Estimates {
        /// Primes to sweep.
        #[arg(short, long = "prime", value_delimiter = ',', default_values_t = vec![2u64, 3, 5])]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        max_level: u32,
        #[arg(long, default_value_t = 12)]
        cap: usize,
        /// Centers per (p, n, k).
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
pub struct Field {
    #[arg(short, long)]
    pub prime: u64,
    #[arg(short = 'N', long)]
    pub precision: u32,
}

#[derive(Args, Debug)]
pub struct Level {
    #[arg(short, long)]
    pub prime: u64,
    #[arg(short)]
    pub m: u32,
    #[arg(short = 'N', long)]
    pub precision: u32,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Write the JSON record here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) if e.is_precision() => EXIT_PRECISION,
            Failure::Core(Error::Internal(_)) => EXIT_FAIL,
            Failure::Core(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            f.exit_code()
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

fn write_record<T: Serialize>(out: &Output, record: &T) -> Result<(), Failure> {
    if let Some(path) = &out.out {
        let mut text = serde_json::to_string_pretty(record).expect("records serialize");
        text.push('\n');
        fs::write(path, text).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// `value` or `value/N`.
fn parse_point(p: u64, text: &str, precision: Option<u32>) -> Result<PadicInt, Failure> {
    let (value, prec) = match text.split_once('/') {
        Some((v, n)) => {
            let n = n
                .trim()
                .parse::<u32>()
                .map_err(|_| Failure::Usage(format!("bad precision in point {text:?}")))?;
            (v, n)
        }
        None => (
            text,
            precision.ok_or_else(|| {
                Failure::Usage(format!("point {text:?} needs a precision: use value/N or -N"))
            })?,
        ),
    };
    let z: BigInt = value
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("bad integer {value:?}")))?;
    Ok(PadicInt::from_bigint(p, prec, &z)?)
}

fn write_line(stdout: &mut dyn Write, line: impl std::fmt::Display) {
    let _ = writeln!(stdout, "{line}");
}

fn verdict(pass: bool) -> (&'static str, i32) {
    if pass {
        ("PASS", EXIT_OK)
    } else {
        ("FAIL", EXIT_FAIL)
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> CmdResult {
    let verbose = cli.verbose > 0;
    match cli.command {
        Command::Delta { field, at, iterations, out } => {
            let x = parse_point(field.prime, &at, Some(field.precision))?;
            let d = x.delta_iter(iterations)?;
            write_line(stdout, &d);
            if verbose {
                write_line(stdout, format!("{d:?}"));
            }
            write_record(&out, &d)?;
            Ok(EXIT_OK)
        }
        Command::Expansion { field, at, level, order, cap, out } => {
            let a = parse_point(field.prime, &at, Some(field.precision))?;
            let cap = match cap {
                Some(c) => c,
                None => field
                    .prime
                    .checked_pow(order)
                    .filter(|&d| d <= 64)
                    .map(|d| d as usize)
                    .ok_or_else(|| Failure::Usage("p^k is large; pass --cap".into()))?,
            };
            let e = delta_expansion(&a, level, order, cap)?;
            let report = check_le1_bounds(&e);
            for (j, c) in e.poly().coeffs().iter().enumerate() {
                write_line(stdout, format!("u^{j}: {c}  v = {}", c.valuation()));
            }
            if let Some(t) = e.tail_valuation() {
                write_line(stdout, format!("dropped terms have valuation >= {t}"));
            }
            if verbose {
                for c in &report.checks {
                    write_line(stdout, format!("degree {}: {:?} -> {:?}", c.degree, c.claim, c.outcome));
                }
            }
            #[derive(Serialize)]
            struct Record<'a> {
                expansion: &'a arithdiff_core::DeltaExpansion,
                report: &'a arithdiff_core::BoundReport,
            }
            write_record(&out, &Record { expansion: &e, report: &report })?;
            let (label, code) = match report.verdict() {
                Outcome::Pass => ("PASS", EXIT_OK),
                Outcome::Violated => ("FAIL", EXIT_FAIL),
                Outcome::Undecided => ("UNDECIDED (raise -N)", EXIT_PRECISION),
            };
            write_line(stdout, label);
            Ok(code)
        }
        Command::Cm { level, out } => {
            let rs = compute_cm(level.prime, level.m, level.precision)?;
            for (alpha, r) in rs.roots().iter().enumerate() {
                if verbose {
                    write_line(stdout, format!("{alpha}: {}", r.value()));
                } else {
                    write_line(stdout, r.value());
                }
            }
            write_record(&out, &rs)?;
            Ok(EXIT_OK)
        }
        Command::Wmatrix { level, out } => {
            let w = w_matrix(level.prime, level.m, level.precision)?;
            let cert = det_unit_certificate(&w);
            if verbose {
                for row in w.rows() {
                    let cells: Vec<String> = row.iter().map(|c| c.value().to_string()).collect();
                    write_line(stdout, cells.join(" "));
                }
            }
            write_line(stdout, format!("{}x{} at precision {}", w.dim(), w.dim(), w.precision()));
            write_line(stdout, serde_json::to_string(&cert).expect("certificate serializes"));
            #[derive(Serialize)]
            struct Record<'a> {
                matrix: &'a arithdiff_core::WMatrix,
                certificate: &'a arithdiff_core::DetCertificate,
            }
            write_record(&out, &Record { matrix: &w, certificate: &cert })?;
            let (label, code) = verdict(cert.is_unit());
            write_line(stdout, label);
            Ok(code)
        }
        Command::Represent { input, out } => {
            let local: LocalFunctionData = read_json(&input)?;
            let r = represent_detailed(&local)?;
            let s = &r.series;
            write_line(
                stdout,
                format!(
                    "p = {}, m = {}, K = {}, {} coefficients at precision {}",
                    s.prime(),
                    s.level(),
                    s.truncation(),
                    s.layers().len() * s.order().len(),
                    s.precision()
                ),
            );
            if verbose {
                print_series(stdout, s);
            }
            write_record(&out, s)?;
            if r.residuals_vanish() {
                Ok(EXIT_OK)
            } else {
                write_line(stdout, "residuals did not vanish");
                Ok(EXIT_FAIL)
            }
        }
        Command::Expand { input, precision, out } => {
            let s: CanonicalSeries = read_json(&input)?;
            let n = precision.unwrap_or(s.precision() + s.level());
            let local = expand(&s, n)?;
            write_line(
                stdout,
                format!(
                    "{} discs, K = {}, precision {}",
                    local.discs().len(),
                    local.truncation(),
                    local.precision()
                ),
            );
            if verbose {
                for (alpha, d) in local.discs().iter().enumerate() {
                    let cells: Vec<String> = d.iter().map(|c| c.value().to_string()).collect();
                    write_line(stdout, format!("{alpha}: {}", cells.join(" ")));
                }
            }
            write_record(&out, &local)?;
            Ok(EXIT_OK)
        }
        Command::Eval { input, at, precision, out } => {
            let text = fs::read_to_string(&input).map_err(|e| io_err(&input, e))?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| io_err(&input, e))?;
            let eval = if value.get("discs").is_some() {
                let local: LocalFunctionData =
                    serde_json::from_value(value).map_err(|e| io_err(&input, e))?;
                let x = parse_point(local.prime(), &at, precision)?;
                evaluate_local(&local, &x)?
            } else {
                let s: CanonicalSeries = serde_json::from_value(value).map_err(|e| io_err(&input, e))?;
                let x = parse_point(s.prime(), &at, precision)?;
                evaluate_canonical(&s, &x)?
            };
            write_line(stdout, &eval.value);
            write_line(stdout, format!("omitted terms have valuation >= {}", eval.tail_valuation));
            write_record(&out, &eval)?;
            Ok(EXIT_OK)
        }
        Command::Roundtrip { input, precision, out } => {
            let s: CanonicalSeries = read_json(&input)?;
            let n = precision.unwrap_or(s.precision() + s.level());
            let report = roundtrip_report(&s, n)?;
            write_line(
                stdout,
                format!(
                    "{} coefficients compared mod p^{}; worst deviation valuation {}",
                    report.deviations.len(),
                    report.modulus_exponent,
                    report.worst
                ),
            );
            if verbose {
                for d in report.deviations.iter().filter(|d| !d.valuation.is_at_least(report.modulus_exponent).unwrap_or(false)) {
                    write_line(stdout, format!("beta {:?}, n {}: {}", d.beta, d.n, d.valuation));
                }
            }
            write_record(&out, &report)?;
            let (label, code) = verdict(report.pass);
            write_line(stdout, label);
            Ok(code)
        }
        Command::Legendre { prime, at, precision, terms, out } => {
            let mut params = LegendreSeriesParams::new(prime, precision);
            if let Some(t) = terms {
                params = params.with_terms(t);
            }
            let a = PadicInt::from_integer(prime, precision + 2, at)?;
            let value = legendre_series_eval(&a, params)?;
            let oracle = legendre_oracle(at, prime)?;
            let expected = PadicInt::from_integer(prime, precision, oracle as i64)?;
            write_line(stdout, format!("series {value}"));
            write_line(stdout, format!("oracle {oracle}"));
            #[derive(Serialize)]
            struct Record<'a> {
                params: LegendreSeriesParams,
                a: i64,
                series: &'a PadicInt,
                oracle: i8,
                pass: bool,
            }
            let pass = value == expected;
            write_record(&out, &Record { params, a: at, series: &value, oracle, pass })?;
            let (label, code) = verdict(pass);
            write_line(stdout, label);
            Ok(code)
        }
        Command::Estimates { primes, max_level, cap, samples, seed, out } => {
            estimates(stdout, &primes, max_level, cap, samples, seed, &out, verbose)
        }
    }
}

fn print_series(stdout: &mut dyn Write, s: &CanonicalSeries) {
    for (n, layer) in s.layers().iter().enumerate() {
        for (beta, c) in s.order().betas().iter().zip(layer) {
            if !c.is_zero() {
                write_line(stdout, format!("beta {beta:?}, n {n}: {}", c.signed_value()));
            }
        }
    }
}

#[derive(Serialize)]
struct SweepCase {
    p: u64,
    n: u32,
    k: u32,
    centers: usize,
    coefficients: usize,
    violated: usize,
    undecided: usize,
}

#[allow(clippy::too_many_arguments)]
fn estimates(
    stdout: &mut dyn Write,
    primes: &[u64],
    max_level: u32,
    cap: usize,
    samples: usize,
    seed: u64,
    out: &Output,
    verbose: bool,
) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for &p in primes {
        if !arithdiff_core::is_prime(p) {
            return Err(Error::NotPrime(p).into());
        }
        for n in 0..=max_level {
            // enough digits for the largest retained bound (n + 1) cap - 1
            let prec = (n + 1) * cap as u32 + n + 1;
            for k in 0..=n.min(3) {
                let mut case = SweepCase { p, n, k, centers: samples, coefficients: 0, violated: 0, undecided: 0 };
                for _ in 0..samples {
                    let digits = (0..prec).fold(BigUint::default(), |acc, _| acc * p + rng.gen_range(0..p));
                    let a = PadicInt::new(p, prec, digits)?;
                    let report = check_le1_bounds(&delta_expansion(&a, n, k, cap)?);
                    for c in &report.checks {
                        case.coefficients += 1;
                        match c.outcome {
                            Outcome::Violated => case.violated += 1,
                            Outcome::Undecided => case.undecided += 1,
                            Outcome::Pass => {}
                        }
                    }
                }
                if verbose {
                    write_line(
                        stdout,
                        format!("p={p} n={n} k={k}: {} coefficients, {} violated", case.coefficients, case.violated),
                    );
                }
                cases.push(case);
            }
        }
    }
    let violated: usize = cases.iter().map(|c| c.violated).sum();
    let undecided: usize = cases.iter().map(|c| c.undecided).sum();
    let total: usize = cases.iter().map(|c| c.coefficients).sum();
    write_line(stdout, format!("{total} coefficients: {violated} violated, {undecided} undecided"));
    write_record(out, &cases)?;
    let (label, code) = verdict(violated == 0 && undecided == 0);
    write_line(stdout, label);
    Ok(code)
}
