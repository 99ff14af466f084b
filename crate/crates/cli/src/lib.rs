//! Batch runner for the ffq experiments and primitives.
//!
//! Each experiment is one subcommand. A run writes a JSON report (or a
//! one-row CSV); `sweep` expands numeric parameter lists and ranges and
//! writes one CSV row per point.
//!
//! Sweep CSV columns, in order:
//! `command,q,n,h,k,r,modulus,empirical,predicted,abs_error,normalized_error,samples,seed,millis,error`.
//! `millis` is 0 unless `--timing` is given, so identical invocations give
//! identical bytes. Floats carry 12 significant digits.
//!
//! Exit codes: 0 success, 2 precondition violated, 3 budget exceeded,
//! 4 a judged check fell outside its tolerance.

use std::collections::BTreeMap;
use std::io::Write;

use clap::{Arg, ArgAction, ArgMatches, Command};
use ffq::arith::CycleType;
use ffq::dirichlet::{katz_average, l_polynomials, write_characters_csv, CharacterFilter, DirichletGroup};
use ffq::experiments::{self as ex, ExperimentReport, Mode, PrimeCountRoute, ShiftTuple};
use ffq::factor::factor;
use ffq::rmt::{divisor_integral, mc_integral, rodgers_closed, rodgers_integral, IntegralMode, UnitarySpectrum};
use ffq::{Error, FieldCtx, Poly};
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_BUDGET: u128 = 100_000_000;
pub const DEFAULT_SAMPLES: usize = 1000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

pub const SWEEP_COLUMNS: [&str; 15] = [
    "command",
    "q",
    "n",
    "h",
    "k",
    "r",
    "modulus",
    "empirical",
    "predicted",
    "abs_error",
    "normalized_error",
    "samples",
    "seed",
    "millis",
    "error",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A parsed invocation of one subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub budget: u128,
    pub format: Format,
    pub timing: bool,
}

#[derive(Debug)]
pub enum CliError {
    Precondition(String),
    Budget(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => EXIT_BUDGET,
            _ => EXIT_PRECONDITION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Precondition(m) | CliError::Budget(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn precondition(msg: impl Into<String>) -> CliError {
    CliError::Precondition(msg.into())
}

struct ParamSpec {
    name: &'static str,
    required: bool,
    help: &'static str,
}

const fn req(name: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { name, required: true, help }
}

const fn opt(name: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { name, required: false, help }
}

struct CommandSpec {
    name: &'static str,
    about: &'static str,
    params: &'static [ParamSpec],
    /// Produces an experiment report and can be swept.
    experiment: bool,
}

const Q: ParamSpec = req("q", "field size (prime)");
const N: ParamSpec = req("n", "degree");
const H: ParamSpec = req("h", "interval parameter: |f - x^(h+1)B| has degree <= h");
const MODE: ParamSpec = opt("mode", "exhaustive (default) or sampled");
const SAMPLES: ParamSpec = opt("samples", "sample count in sampled or monte_carlo mode");

const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "prime-count",
        about: "Count prime polynomials of degree n [Prime Polynomial Theorem, necklace formula]",
        params: &[Q, N, opt("route", "exhaustive (default) or necklace")],
        experiment: true,
    },
    CommandSpec {
        name: "interval-primes",
        about: "Primes in short intervals [Bank-Bary-Soroker-Rosenzweig]",
        params: &[Q, N, H, MODE, SAMPLES],
        experiment: true,
    },
    CommandSpec {
        name: "interval-cycles",
        about: "Cycle types in short intervals [Bank-Bary-Soroker-Rosenzweig, Cauchy's formula]",
        params: &[Q, N, H, req("partition", "cycle lengths joined by '+', e.g. 2+1+1"), MODE, SAMPLES],
        experiment: true,
    },
    CommandSpec {
        name: "cycle-census",
        about: "Cycle-type frequencies over all of M_n [Cauchy's formula]",
        params: &[Q, N],
        experiment: true,
    },
    CommandSpec {
        name: "ap-primes",
        about: "Primes in an arithmetic progression [prime polynomial theorem for progressions, Weil bound]",
        params: &[Q, N, req("modulus", "modulus Q, e.g. 0,1,1"), req("residue", "residue A coprime to Q")],
        experiment: true,
    },
    CommandSpec {
        name: "chowla",
        about: "Mobius autocorrelation sum [Carmon-Rudnick function-field Chowla]",
        params: &[Q, N, req("shifts", "shifts separated by ';', or constants separated by ','"), opt("exps", "exponents 1 or 2, comma-separated"), MODE, SAMPLES],
        experiment: true,
    },
    CommandSpec {
        name: "twin",
        about: "Prime tuples f + a_i [Bary-Soroker twin prime asymptotic]",
        params: &[Q, N, req("shifts", "shifts separated by ';', or constants separated by ',' (first must be 0)")],
        experiment: true,
    },
    CommandSpec {
        name: "divisor-corr",
        about: "Shifted divisor correlation d_r(f) d_r(f + h) [Andrade-Bary-Soroker-Rudnick]",
        params: &[Q, N, req("r", "divisor order"), req("shift", "nonzero shift of degree < n")],
        experiment: true,
    },
    CommandSpec {
        name: "joint-cycles",
        about: "Joint cycle types of f and f + a [Andrade-Bary-Soroker-Rudnick independence]",
        params: &[Q, N, req("shift", "nonzero shift of degree < n"), opt("partitions", "pair of partitions 'a;b', each like 2+1")],
        experiment: true,
    },
    CommandSpec {
        name: "var-psi",
        about: "Variance of Lambda in short intervals [Keating-Rudnick]",
        params: &[Q, N, H, MODE, SAMPLES],
        experiment: true,
    },
    CommandSpec {
        name: "var-lambda2",
        about: "Variance of Lambda_2 in short intervals [Keating-Rudnick, Rodgers]",
        params: &[Q, N, H, MODE, SAMPLES],
        experiment: true,
    },
    CommandSpec {
        name: "var-mobius",
        about: "Variance of mu in short intervals [Keating-Rudnick Mobius variance]",
        params: &[Q, N, H, MODE, SAMPLES],
        experiment: true,
    },
    CommandSpec {
        name: "var-divisor",
        about: "Variance of d_k in short intervals [Keating-Rodgers-Roditty-Gershon-Rudnick]",
        params: &[Q, N, H, req("k", "divisor order"), MODE, SAMPLES],
        experiment: true,
    },
    CommandSpec {
        name: "var-g",
        about: "Variance of primes over residues mod Q [Keating-Rudnick, Hooley analogue]",
        params: &[Q, N, req("modulus", "modulus Q, e.g. 0,1,1")],
        experiment: true,
    },
    CommandSpec {
        name: "factor",
        about: "Factor a polynomial into monic irreducibles [Cantor-Zassenhaus]",
        params: &[Q, req("poly", "polynomial, lowest coefficient first")],
        experiment: false,
    },
    CommandSpec {
        name: "characters",
        about: "Dirichlet characters mod Q with L-polynomials and Frobenius angles [Weil's Riemann hypothesis]",
        params: &[Q, req("modulus", "x^m or a squarefree modulus"), opt("filter", "all (default), even, primitive, even-primitive")],
        experiment: false,
    },
    CommandSpec {
        name: "decomposition",
        about: "Check the character expansion of interval Mobius sums [Keating-Rudnick]",
        params: &[Q, N, H],
        experiment: false,
    },
    CommandSpec {
        name: "katz",
        about: "Average of |tr U^j|^2 over Frobenius classes of even primitive characters [Katz equidistribution]",
        params: &[Q, req("dim", "matrix size N; modulus x^(N+2)"), opt("power", "j (default 1)"), SAMPLES],
        experiment: false,
    },
    CommandSpec {
        name: "matrix-integral",
        about: "Unitary matrix integrals [Diaconis-Shahshahani, Keating-Rodgers-Roditty-Gershon-Rudnick, Rodgers]",
        params: &[
            req("kind", "power-trace, divisor or rodgers"),
            req("dim", "matrix size N"),
            req("m", "power or degree"),
            opt("k", "divisor order for kind=divisor"),
            opt("mode", "closed (default) or monte_carlo"),
            SAMPLES,
        ],
        experiment: false,
    },
];

fn common_args(cmd: Command) -> Command {
    cmd.arg(Arg::new("seed").long("seed").global(true).help("random seed (default 0)"))
        .arg(Arg::new("budget").long("budget").global(true).help("maximum enumerated polynomials (default 1e8)"))
        .arg(Arg::new("threads").long("threads").global(true).help("worker threads (default: all cores)"))
        .arg(Arg::new("format").long("format").global(true).help("json (default) or csv"))
        .arg(Arg::new("out").long("out").global(true).help("output file (default: stdout)"))
        .arg(Arg::new("timing").long("timing").global(true).action(ArgAction::SetTrue).help("record wall-clock millis"))
}

fn subcommand(spec: &CommandSpec) -> Command {
    spec.params.iter().fold(Command::new(spec.name).about(spec.about), |cmd, p| {
        cmd.arg(Arg::new(p.name).long(p.name).required(p.required).help(p.help))
    })
}

/// The full command tree.
pub fn cli() -> Command {
    let sweep = Command::new("sweep")
        .about("Run an experiment over a grid; numeric values accept lists 31,37 and ranges 3..6; writes CSV")
        .arg(Arg::new("experiment").required(true).help("experiment subcommand"))
        .arg(Arg::new("args").num_args(0..).trailing_var_arg(true).allow_hyphen_values(true).help("experiment flags"));
    let mut root = Command::new("ffq").about("Arithmetic statistics over F_q[x] checked against their function-field theorems").subcommand_required(true);
    for spec in COMMANDS {
        root = root.subcommand(subcommand(spec));
    }
    common_args(root.subcommand(sweep))
}

fn parse_budget(text: &str) -> CliResult<u128> {
    if let Ok(v) = text.parse::<u128>() {
        return Ok(v);
    }
    match text.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e38 => Ok(v as u128),
        _ => Err(precondition(format!("invalid budget {text:?}"))),
    }
}

fn config_from(name: &str, m: &ArgMatches, root: &ArgMatches) -> CliResult<RunConfig> {
    let spec = COMMANDS.iter().find(|c| c.name == name).ok_or_else(|| precondition(format!("unknown command {name:?}")))?;
    let mut params = BTreeMap::new();
    for p in spec.params {
        if let Some(v) = m.get_one::<String>(p.name) {
            params.insert(p.name.to_string(), v.clone());
        }
    }
    let global = |key: &str| m.get_one::<String>(key).or_else(|| root.get_one::<String>(key)).cloned();
    let seed = match global("seed") {
        Some(s) => s.parse().map_err(|_| precondition(format!("invalid seed {s:?}")))?,
        None => DEFAULT_SEED,
    };
    let budget = global("budget").map(|b| parse_budget(&b)).transpose()?.unwrap_or(DEFAULT_BUDGET);
    let format = match global("format").as_deref() {
        None | Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        Some(other) => return Err(precondition(format!("unknown format {other:?}"))),
    };
    let timing = m.get_flag("timing") || root.get_flag("timing");
    Ok(RunConfig { command: name.into(), params, seed, budget, format, timing })
}

impl RunConfig {
    fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> CliResult<&str> {
        self.raw(key).ok_or_else(|| precondition(format!("missing --{key}")))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.required(key)?;
        v.parse().map_err(|_| precondition(format!("--{key}: cannot parse {v:?}")))
    }

    fn number_or<T: std::str::FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(_) => self.number(key),
        }
    }

    fn field(&self) -> CliResult<FieldCtx> {
        Ok(FieldCtx::new(self.number::<u64>("q")?)?)
    }

    fn poly(&self, ctx: &FieldCtx, key: &str) -> CliResult<Poly> {
        Ok(Poly::parse(ctx, self.required(key)?)?)
    }

    fn mode(&self) -> CliResult<Mode> {
        match self.raw("mode").unwrap_or("exhaustive") {
            "exhaustive" => Ok(Mode::Exhaustive),
            "sampled" => Ok(Mode::Sampled { samples: self.number_or("samples", DEFAULT_SAMPLES)?, seed: self.seed }),
            other => Err(precondition(format!("--mode: expected exhaustive or sampled, got {other:?}"))),
        }
    }

    fn integral_mode(&self) -> CliResult<IntegralMode> {
        match self.raw("mode").unwrap_or("closed") {
            "closed" => Ok(IntegralMode::Closed),
            "monte_carlo" => Ok(IntegralMode::MonteCarlo { samples: self.number_or("samples", 100_000)?, seed: self.seed }),
            other => Err(precondition(format!("--mode: expected closed or monte_carlo, got {other:?}"))),
        }
    }
}

/// "a;b;c" lists polynomials; without ';', "0,1" lists constants.
pub fn parse_shifts(ctx: &FieldCtx, text: &str) -> CliResult<Vec<Poly>> {
    let parts: Vec<&str> = if text.contains(';') { text.split(';').collect() } else { text.split(',').collect() };
    parts.iter().map(|p| Poly::parse(ctx, p.trim()).map_err(CliError::from)).collect()
}

/// "2+1+1" as a cycle type of degree 4.
pub fn parse_partition(text: &str) -> CliResult<CycleType> {
    let parts: Vec<usize> = text
        .split('+')
        .map(|p| p.trim().parse::<usize>().ok().filter(|&v| v > 0))
        .collect::<Option<_>>()
        .ok_or_else(|| precondition(format!("invalid partition {text:?}")))?;
    let n: usize = parts.iter().sum();
    let mut lambda = vec![0u32; n];
    for p in parts {
        lambda[p - 1] += 1;
    }
    Ok(CycleType::new(lambda)?)
}

/// What a run produced.
pub enum Output {
    Report(Box<ExperimentReport>),
    Json(serde_json::Value),
    /// Pre-rendered CSV text.
    Csv(String),
    /// A primitive's result together with whether its own check passed.
    Checked(serde_json::Value, bool),
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

/// Runs one configuration.
pub fn execute(cfg: &RunConfig) -> CliResult<Output> {
    let budget = cfg.budget;
    let q = || cfg.number::<u32>("q");
    let n = || cfg.number::<usize>("n");
    let h = || cfg.number::<usize>("h");
    let report = match cfg.command.as_str() {
        "prime-count" => {
            let route = match cfg.raw("route").unwrap_or("exhaustive") {
                "exhaustive" => PrimeCountRoute::Exhaustive,
                "necklace" => PrimeCountRoute::NecklaceOnly,
                other => return Err(precondition(format!("--route: expected exhaustive or necklace, got {other:?}"))),
            };
            ex::exp_prime_count(q()?, n()?, route, budget)?
        }
        "interval-primes" => ex::exp_interval_primes(q()?, n()?, h()?, cfg.mode()?, budget)?,
        "interval-cycles" => {
            let lambda = parse_partition(cfg.required("partition")?)?;
            ex::exp_interval_cycles(q()?, n()?, h()?, &lambda, cfg.mode()?, budget)?
        }
        "cycle-census" => ex::exp_cycle_census(q()?, n()?, budget)?,
        "ap-primes" => {
            let ctx = cfg.field()?;
            ex::exp_ap_primes(q()?, n()?, &cfg.poly(&ctx, "modulus")?, &cfg.poly(&ctx, "residue")?, budget)?
        }
        "chowla" => {
            let ctx = cfg.field()?;
            let shifts = parse_shifts(&ctx, cfg.required("shifts")?)?;
            let exps = match cfg.raw("exps") {
                None => vec![1; shifts.len()],
                Some(t) => t
                    .split(',')
                    .map(|e| e.trim().parse::<u8>().map_err(|_| precondition(format!("--exps: cannot parse {e:?}"))))
                    .collect::<CliResult<_>>()?,
            };
            let tuple = ShiftTuple::new(shifts, exps, n()?)?;
            ex::exp_chowla(q()?, n()?, &tuple, cfg.mode()?, budget)?
        }
        "twin" => {
            let ctx = cfg.field()?;
            let tuple = ShiftTuple::plain(parse_shifts(&ctx, cfg.required("shifts")?)?, n()?)?;
            ex::exp_twin(q()?, n()?, &tuple, budget)?
        }
        "divisor-corr" => {
            let ctx = cfg.field()?;
            ex::exp_divisor_corr(q()?, n()?, cfg.number("r")?, &cfg.poly(&ctx, "shift")?, budget)?
        }
        "joint-cycles" => {
            let ctx = cfg.field()?;
            let pair = match cfg.raw("partitions") {
                None => None,
                Some(t) => {
                    let (a, b) = t.split_once(';').ok_or_else(|| precondition("--partitions: expected 'a;b'"))?;
                    Some((parse_partition(a)?, parse_partition(b)?))
                }
            };
            ex::exp_joint_cycles(q()?, n()?, &cfg.poly(&ctx, "shift")?, pair.as_ref().map(|(a, b)| (a, b)), budget)?
        }
        "var-psi" => ex::exp_var_psi(q()?, n()?, h()?, cfg.mode()?, budget)?,
        "var-lambda2" => ex::exp_var_lambda2(q()?, n()?, h()?, cfg.mode()?, budget)?,
        "var-mobius" => ex::exp_var_mobius(q()?, n()?, h()?, cfg.mode()?, budget)?,
        "var-divisor" => ex::exp_var_divisor(q()?, n()?, h()?, cfg.number("k")?, cfg.mode()?, budget)?,
        "var-g" => {
            let ctx = cfg.field()?;
            ex::exp_var_g(q()?, n()?, &cfg.poly(&ctx, "modulus")?, budget)?
        }
        _ => return execute_primitive(cfg),
    };
    let mut report = report;
    if !cfg.timing {
        report.millis = 0;
    }
    Ok(Output::Report(Box::new(report)))
}

#[derive(Serialize)]
struct FactorOut {
    unit: u32,
    factors: Vec<(String, u32)>,
}

#[derive(Serialize)]
struct IntegralOut {
    kind: String,
    dim: usize,
    m: usize,
    k: Option<usize>,
    mode: String,
    mean: f64,
    stderr: f64,
    closed: Option<f64>,
}

fn execute_primitive(cfg: &RunConfig) -> CliResult<Output> {
    match cfg.command.as_str() {
        "factor" => {
            let ctx = cfg.field()?;
            let f = factor(&cfg.poly(&ctx, "poly")?)?;
            let out = FactorOut { unit: f.unit, factors: f.factors.iter().map(|(p, e)| (p.to_text(), *e)).collect() };
            Ok(Output::Json(json(&out)))
        }
        "characters" => {
            let ctx = cfg.field()?;
            let group = DirichletGroup::new(&cfg.poly(&ctx, "modulus")?, cfg.budget)?;
            let filter = match cfg.raw("filter").unwrap_or("all") {
                "all" => CharacterFilter::All,
                "even" => CharacterFilter::Even,
                "primitive" => CharacterFilter::Primitive,
                "even-primitive" => CharacterFilter::EvenPrimitive,
                other => return Err(precondition(format!("--filter: unknown filter {other:?}"))),
            };
            let lpolys = l_polynomials(&group, filter)?;
            let mut buf = Vec::new();
            write_characters_csv(&mut buf, &lpolys)?;
            Ok(Output::Csv(String::from_utf8(buf).expect("ascii")))
        }
        "decomposition" => {
            let rows = ex::mobius_character_decomposition(cfg.number("q")?, cfg.number("n")?, cfg.number("h")?, None, cfg.budget)?;
            let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
            Ok(Output::Checked(json(&rows), worst <= 1e-6))
        }
        "katz" => {
            let power: i64 = cfg.number_or("power", 1)?;
            let samples = cfg.number_or("samples", 100_000)?;
            let stat = move |s: &UnitarySpectrum| s.power_trace(power).norm_sqr();
            let k = katz_average(cfg.number("q")?, cfg.number("dim")?, stat, samples, cfg.seed, cfg.budget)?;
            Ok(Output::Json(json(&k)))
        }
        "matrix-integral" => {
            let kind = cfg.required("kind")?.to_string();
            let dim: usize = cfg.number("dim")?;
            let m: usize = cfg.number("m")?;
            let mode = cfg.integral_mode()?;
            let mode_label = match mode {
                IntegralMode::Closed => "closed",
                IntegralMode::MonteCarlo { .. } => "monte_carlo",
            };
            let mut k = None;
            let (est, closed) = match kind.as_str() {
                "power-trace" => {
                    let closed = m.min(dim) as f64;
                    let est = match mode {
                        IntegralMode::Closed => ffq::rmt::Estimate::exact(closed),
                        IntegralMode::MonteCarlo { samples, seed } => mc_integral(|s| s.power_trace(m as i64).norm_sqr(), dim, samples, seed),
                    };
                    (est, Some(closed))
                }
                "divisor" => {
                    let kk: usize = cfg.number("k")?;
                    k = Some(kk);
                    let closed = divisor_integral(kk, m, dim, IntegralMode::Closed).ok().map(|e| e.mean);
                    (divisor_integral(kk, m, dim, mode)?, closed)
                }
                "rodgers" => (rodgers_integral(m, dim, mode)?, Some(rodgers_closed(m, dim) as f64)),
                other => return Err(precondition(format!("--kind: unknown integral {other:?}"))),
            };
            let out = IntegralOut { kind, dim, m, k, mode: mode_label.into(), mean: est.mean, stderr: est.stderr, closed };
            Ok(Output::Json(json(&out)))
        }
        other => Err(precondition(format!("unknown command {other:?}"))),
    }
}

/// Formats like C's `%.12g`.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt_num<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV row for a report, in [`SWEEP_COLUMNS`] order.
pub fn report_row(r: &ExperimentReport) -> Vec<String> {
    let p = &r.params;
    vec![
        r.experiment.clone(),
        p.q.to_string(),
        opt_num(p.n),
        opt_num(p.h),
        opt_num(p.k),
        opt_num(p.r),
        p.modulus.clone().unwrap_or_default(),
        fmt_float(r.empirical),
        fmt_float(r.predicted),
        fmt_float(r.abs_error),
        r.normalized_error.map(fmt_float).unwrap_or_default(),
        opt_num(p.samples),
        opt_num(p.seed),
        r.millis.to_string(),
        String::new(),
    ]
}

fn error_row(cfg: &RunConfig, err: &CliError) -> Vec<String> {
    let get = |k: &str| cfg.raw(k).unwrap_or_default().to_string();
    let mut row = vec![cfg.command.clone(), get("q"), get("n"), get("h"), get("k"), get("r"), get("modulus")];
    row.extend(std::iter::repeat_n(String::new(), 4));
    row.extend([get("samples"), cfg.seed.to_string(), "0".into(), err.to_string()]);
    row
}

/// Expands "31,37" and "3..6" (inclusive). A reversed range is empty.
pub fn expand_values(text: &str) -> CliResult<Vec<String>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| precondition(format!("invalid range {part:?}")))?;
            let b: u64 = b.trim().parse().map_err(|_| precondition(format!("invalid range {part:?}")))?;
            out.extend((a..=b).map(|v| v.to_string()));
        } else {
            out.push(part.trim().to_string());
        }
    }
    Ok(out)
}

/// Parameters that take numeric lists in a sweep; the rest are passed as is.
const SWEPT: [&str; 8] = ["q", "n", "h", "k", "r", "samples", "dim", "m"];

/// Expands a sweep into one configuration per grid point, first parameter
/// varying slowest.
pub fn sweep_points(base: &RunConfig) -> CliResult<Vec<RunConfig>> {
    let mut points = vec![base.clone()];
    for (key, value) in &base.params {
        if !SWEPT.contains(&key.as_str()) {
            continue;
        }
        let values = expand_values(value)?;
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut c = p.clone();
                    c.params.insert(key.clone(), v.clone());
                    c
                })
            })
            .collect();
    }
    Ok(points)
}

/// Runs every sweep point and writes the CSV. Point failures land in the
/// `error` column.
pub fn run_sweep<W: Write>(base: &RunConfig, out: W) -> CliResult<()> {
    if !COMMANDS.iter().any(|c| c.name == base.command && c.experiment) {
        return Err(precondition(format!("{:?} is not a sweepable experiment", base.command)));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
    for point in sweep_points(base)? {
        let row = match execute(&point) {
            Ok(Output::Report(r)) => report_row(&r),
            Ok(_) => unreachable!("experiments produce reports"),
            Err(e) => error_row(&point, &e),
        };
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

fn sweep_config(m: &ArgMatches, root: &ArgMatches) -> CliResult<RunConfig> {
    let name = m.get_one::<String>("experiment").expect("required");
    let spec = COMMANDS.iter().find(|c| c.name == name).ok_or_else(|| precondition(format!("unknown experiment {name:?}")))?;
    let rest: Vec<String> = m.get_many::<String>("args").map(|v| v.cloned().collect()).unwrap_or_default();
    let argv = std::iter::once(name.clone()).chain(rest);
    let sub = common_args(subcommand(spec)).try_get_matches_from(argv).map_err(|e| precondition(e.to_string()))?;
    config_from(name, &sub, root)
}

fn write_output<W: Write + ?Sized>(out: &mut W, cfg: &RunConfig, output: &Output) -> CliResult<i32> {
    let code = match output {
        Output::Report(r) => {
            match cfg.format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(r.as_ref()).expect("serializable"))?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
                    w.write_record(report_row(r)).map_err(csv_err)?;
                    w.flush()?;
                }
            }
            if r.passed() {
                EXIT_OK
            } else {
                EXIT_VERDICT
            }
        }
        Output::Json(v) => {
            writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable"))?;
            EXIT_OK
        }
        Output::Checked(v, ok) => {
            writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable"))?;
            if *ok {
                EXIT_OK
            } else {
                EXIT_VERDICT
            }
        }
        Output::Csv(text) => {
            out.write_all(text.as_bytes())?;
            EXIT_OK
        }
    };
    Ok(code)
}

/// Parses `args` (program name first), runs, and writes to `--out` or
/// `stdout`. Returns the exit status.
pub fn main_with<W: Write>(args: impl IntoIterator<Item = String>, stdout: &mut W, stderr: &mut impl Write) -> i32 {
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PRECONDITION } else { EXIT_OK };
            let _ = write!(if e.use_stderr() { &mut *stderr as &mut dyn Write } else { &mut *stdout as &mut dyn Write }, "{}", e.render());
            return code;
        }
    };
    match run_matches(&matches, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_matches<W: Write>(root: &ArgMatches, stdout: &mut W) -> CliResult<i32> {
    let (name, m) = root.subcommand().expect("subcommand required");
    let threads = m.get_one::<String>("threads").or_else(|| root.get_one::<String>("threads"));
    if let Some(t) = threads {
        let t: usize = t.parse().map_err(|_| precondition(format!("invalid thread count {t:?}")))?;
        // Only the first request in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out_path = m.get_one::<String>("out").or_else(|| root.get_one::<String>("out")).cloned();
    let mut file;
    let out: &mut dyn Write = match &out_path {
        Some(p) => {
            file = std::io::BufWriter::new(std::fs::File::create(p)?);
            &mut file
        }
        None => stdout,
    };
    if name == "sweep" {
        let cfg = sweep_config(m, root)?;
        run_sweep(&cfg, &mut *out)?;
        out.flush()?;
        return Ok(EXIT_OK);
    }
    let cfg = config_from(name, m, root)?;
    let output = execute(&cfg)?;
    let code = write_output(out, &cfg, &output)?;
    out.flush()?;
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_twelve_significant_digits() {
        assert_eq!(fmt_float(3.0), "3");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_float(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_float(184704.2), "184704.2");
    }

    #[test]
    fn value_expansion() {
        assert_eq!(expand_values("31,37").unwrap(), ["31", "37"]);
        assert_eq!(expand_values("3..5").unwrap(), ["3", "4", "5"]);
        assert!(expand_values("5..3").unwrap().is_empty());
    }

    #[test]
    fn partitions_and_shifts() {
        assert_eq!(parse_partition("2+1+1").unwrap().label(), "1^2 2^1");
        assert!(parse_partition("2+0").is_err());
        let f5 = FieldCtx::new(5).unwrap();
        let s = parse_shifts(&f5, "0,1").unwrap();
        assert_eq!(s, [Poly::zero(&f5), Poly::one(&f5)]);
        let s = parse_shifts(&f5, "0,1;2").unwrap();
        assert_eq!(s, [Poly::x(&f5), Poly::constant(&f5, 2)]);
    }

    #[test]
    fn failed_verdict_maps_to_exit_four() {
        let cfg = RunConfig { command: "var-psi".into(), params: BTreeMap::new(), seed: 0, budget: DEFAULT_BUDGET, format: Format::Csv, timing: false };
        let mut report = ex::exp_var_psi(5, 4, 0, Mode::Exhaustive, DEFAULT_BUDGET).unwrap();
        let mut out = Vec::new();
        assert_eq!(write_output(&mut out, &cfg, &Output::Report(Box::new(report.clone()))).unwrap(), EXIT_OK);
        report.verdict = ex::Verdict::Fail;
        assert_eq!(write_output(&mut out, &cfg, &Output::Report(Box::new(report))).unwrap(), EXIT_VERDICT);
        assert_eq!(write_output(&mut out, &cfg, &Output::Checked(serde_json::Value::Null, false)).unwrap(), EXIT_VERDICT);
    }

    #[test]
    fn every_experiment_has_one_subcommand() {
        let names: Vec<&str> = COMMANDS.iter().map(|c| c.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        cli().debug_assert();
    }
}
