//! `tensorpow` command line.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 domain error, 3 invariant
//! violation (including a failed bound or self check), 64 usage error.

mod family;
mod output;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use family::{FamilyArgs, FamilySpec};
use output::{Cell, Format, Report};
use rayon::prelude::*;
use serde::Serialize;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;
use tensorpow::bounds::{verify_bounds, DEFAULT_DELTAS};
use tensorpow::hypercount::{a2_coarse_bounds, a2_sandwich, a_count, tensor_count_pair, CountOptions};
use tensorpow::rearrange::{tau_at, tau_topk};
use tensorpow::ties::Precision;
use tensorpow::tractability::{classify, default_d_range, FitPolicy};
use tensorpow::{BigCount, Dd, Error, TensorProduct};

#[derive(Parser, Debug, Serialize)]
#[command(name = "tensorpow", version, about = "Exact rearrangements of tensor power sequences")]
struct Cli {
    /// Output format
    #[arg(long = "out", global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Tabulate σ(n) for n = 1..=n-max
    Spectrum(SpectrumArgs),
    /// Exact lattice point counts
    Count(CountArgs),
    /// Values of the rearrangement τ
    Tau(TauArgs),
    /// Check the preasymptotic bounds against exact τ
    Bounds(BoundsArgs),
    /// Classify polynomial tractability of a family
    Tract(TractArgs),
    /// Run the cross-oracle self check
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    n_max: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
enum CountMode {
    /// A_N(r, l) = #{n in {N, N+1, ...}^l : n_1⋯n_l <= r}
    #[value(name = "aN")]
    #[serde(rename = "aN")]
    AN,
    /// #{n in N^d : σ(n_1)⋯σ(n_d) >= t}
    Tensor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Cmp {
    Ge,
    Gt,
}

#[derive(Args, Debug, Serialize)]
struct CountArgs {
    #[arg(long, value_enum)]
    mode: CountMode,
    #[arg(long = "N")]
    n_min: Option<u64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    l: Option<u32>,
    /// δ of the coarse bound r^(1+δ)/δ^(l-1)
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    d: Option<usize>,
    /// Threshold t
    #[arg(long, conflicts_with = "log_t")]
    t: Option<f64>,
    /// Threshold as ln t
    #[arg(long, allow_hyphen_values = true)]
    log_t: Option<f64>,
    #[arg(long = "cmp", value_enum, default_value_t = Cmp::Ge)]
    cmp: Cmp,
}

#[derive(Args, Debug, Serialize)]
#[group(id = "which", required = true, multiple = false, args = ["n", "top"])]
struct TauArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    d: usize,
    /// Single index; may exceed 64 bits
    #[arg(long)]
    n: Option<String>,
    /// First K values
    #[arg(long)]
    top: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    d: u32,
    /// `A..B` (inclusive)
    #[arg(long, value_parser = parse_range)]
    #[serde(serialize_with = "ser_range")]
    n_range: RangeInclusive<u64>,
    /// δ grid; the best bound over the grid is reported
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DELTAS)]
    delta: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct TractArgs {
    /// Family as JSON, or `@file.json`
    #[arg(long)]
    family_spec: String,
    /// Comma list of dimensions, or `A..B` for A, 2A, 4A, … up to B
    #[arg(long)]
    d_range: Option<String>,
    #[arg(long, value_delimiter = ',')]
    eps_grid: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random cases per randomized check
    #[arg(long, default_value_t = 24)]
    cases: usize,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("bad range end `{x}`: {e}"));
    Ok(parse(a)?..=parse(b)?)
}

fn ser_range<S: serde::Serializer>(r: &RangeInclusive<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{}..{}", r.start(), r.end()))
}

fn parse_d_range(s: &str) -> Result<Vec<u32>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_u32(a)?, parse_u32(b.strip_prefix('=').unwrap_or(b))?);
        if a == 0 || a > b {
            return Err(format!("bad d range `{s}`"));
        }
        let mut out = Vec::new();
        let mut d = a;
        while d <= b {
            out.push(d);
            d = d.checked_mul(2).ok_or("d range overflows")?;
        }
        Ok(out)
    } else {
        s.split(',').map(parse_u32).collect()
    }
}

fn parse_u32(s: &str) -> Result<u32, String> {
    s.trim().parse().map_err(|e| format!("bad dimension `{s}`: {e}"))
}

/// Failure of a subcommand, mapped to an exit code.
enum Fail {
    Usage(String),
    Lib(Error),
    /// A guaranteed property did not hold; the report is still written.
    Check(String),
    Io(std::io::Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type Out = Result<(Report, Option<String>), Fail>;

fn config<T: Serialize>(cli: &Cli, args: &T, precision: Precision) -> serde_json::Value {
    let mut v = serde_json::to_value(args).unwrap_or_default();
    if let Some(obj) = v.as_object_mut() {
        obj.insert("precision".into(), serde_json::to_value(precision).unwrap_or_default());
        obj.insert("threads".into(), serde_json::to_value(cli.threads).unwrap_or_default());
    }
    v
}

fn spectrum(cli: &Cli, a: &SpectrumArgs, p: Precision) -> Out {
    let sp = a.family.build(p)?;
    let mut rep = Report::new("spectrum", config(cli, a, p), vec!["n", "sigma", "log_sigma"]);
    rep.meta("label", sp.label());
    rep.meta("sigma2", sp.sigma2());
    rep.meta("tie_multiplicity_v", sp.tie_multiplicity().to_string());
    rep.meta("envelope", sp.envelope());
    let end = match sp.domain_end() {
        Some(e) => a.n_max.min(e),
        None => a.n_max,
    };
    for (n, l) in sp.sample(end)? {
        rep.push(vec![Cell::Int(n), Cell::exp(l), Cell::log(l)]);
    }
    Ok((rep, None))
}

fn count(cli: &Cli, a: &CountArgs, p: Precision) -> Out {
    match a.mode {
        CountMode::AN => {
            let (n_min, r, l) = match (a.n_min, a.r, a.l) {
                (Some(n), Some(r), Some(l)) => (n, r, l),
                _ => return Err(Fail::Usage("--mode aN needs --N, --r and --l".into())),
            };
            let exact = a_count(n_min, r, l)?;
            let mut rep = Report::new(
                "count",
                config(cli, a, p),
                vec!["N", "r", "l", "count", "sandwich_lower", "sandwich_upper", "delta", "coarse_lower", "coarse_upper"],
            );
            let opt = |x: Option<f64>| x.map_or(Cell::Empty, Cell::Lin);
            let sandwich = (n_min == 2).then(|| a2_sandwich(r, l).ok()).flatten();
            let coarse = (n_min == 2).then(|| a2_coarse_bounds(r, l, a.delta)).transpose()?;
            rep.push(vec![
                Cell::Int(n_min),
                Cell::Lin(r),
                Cell::Int(l as u64),
                Cell::Count(exact),
                opt(sandwich.map(|s| s.0)),
                opt(sandwich.map(|s| s.1)),
                Cell::Lin(a.delta),
                opt(coarse.map(|c| c.0)),
                opt(coarse.map(|c| c.1)),
            ]);
            Ok((rep, None))
        }
        CountMode::Tensor => {
            let d = a.d.ok_or_else(|| Fail::Usage("--mode tensor needs --d".into()))?;
            let log_t = match (a.t, a.log_t) {
                (Some(t), None) if t > 0.0 => Dd::from_f64(t).ln(),
                (Some(t), None) => return Err(Fail::Lib(Error::Domain(format!("threshold must be positive, got {t}")))),
                (None, Some(lt)) => Dd::from_f64(lt),
                _ => return Err(Fail::Usage("--mode tensor needs --t or --log-t".into())),
            };
            let product = TensorProduct::power(a.family.build(p)?, d);
            let pair = tensor_count_pair(&product, log_t, &CountOptions::default())?;
            let mut rep = Report::new(
                "count",
                config(cli, a, p),
                vec!["d", "log_t", "t", "count", "count_ge", "count_gt", "tie_class_size"],
            );
            let chosen = match a.cmp {
                Cmp::Ge => pair.ge.clone(),
                Cmp::Gt => pair.gt.clone(),
            };
            rep.push(vec![
                Cell::Int(d as u64),
                Cell::log(log_t),
                Cell::exp(log_t),
                Cell::Count(chosen),
                Cell::Count(pair.ge.clone()),
                Cell::Count(pair.gt.clone()),
                Cell::Count(pair.tie_class_size()),
            ]);
            Ok((rep, None))
        }
    }
}

fn tau(cli: &Cli, a: &TauArgs, p: Precision) -> Out {
    let product = TensorProduct::power(a.family.build(p)?, a.d);
    if let Some(n) = &a.n {
        let n: BigCount = n.parse().map_err(|e| Fail::Usage(format!("bad --n `{n}`: {e}")))?;
        if n.is_zero() {
            return Err(Fail::Lib(Error::ZeroIndex));
        }
        let t = tau_at(&product, n)?;
        let mut rep = Report::new(
            "tau",
            config(cli, a, p),
            vec!["n", "log_tau", "tau", "tie_class_size", "count_ge", "count_gt"],
        );
        rep.push(vec![
            Cell::Count(t.n.clone()),
            Cell::log(t.tau_log),
            Cell::exp(t.tau_log),
            Cell::Count(t.tie_class_size.clone()),
            Cell::Count(t.count_ge.clone()),
            Cell::Count(t.count_gt.clone()),
        ]);
        return Ok((rep, None));
    }
    let k = a.top.expect("clap enforces --n or --top");
    if k == 0 {
        return Err(Fail::Lib(Error::Domain("--top must be at least 1".into())));
    }
    let values = tau_topk(&product, k)?;
    let tol = product.tolerance();
    // Tie class of each distinct value, which may extend past the first k.
    let mut starts = vec![0usize];
    for i in 1..values.len() {
        if !tol.eq(values[i], values[i - 1]) {
            starts.push(i);
        }
    }
    let classes = starts
        .par_iter()
        .map(|&i| {
            if values[i].is_finite() {
                tensor_count_pair(&product, values[i], &CountOptions::default()).map(|c| Some(c.tie_class_size()))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rep = Report::new("tau", config(cli, a, p), vec!["n", "log_tau", "tau", "tie_class_size"]);
    let mut class = 0;
    for (i, v) in values.iter().enumerate() {
        if class + 1 < starts.len() && starts[class + 1] == i {
            class += 1;
        }
        let size = classes[class].clone().map_or(Cell::Text("unbounded".into()), Cell::Count);
        rep.push(vec![Cell::Int(i as u64 + 1), Cell::log(*v), Cell::exp(*v), size]);
    }
    Ok((rep, None))
}

fn bounds(cli: &Cli, a: &BoundsArgs, p: Precision) -> Out {
    let sp = a.family.build(p)?;
    let r = verify_bounds(&sp, a.d, a.n_range.clone(), &a.delta)?;
    let mut rep = Report::new(
        "bounds",
        config(cli, a, p),
        vec![
            "n",
            "tau",
            "log_tau",
            "lower",
            "log_lower",
            "upper_best",
            "log_upper_best",
            "delta_best",
            "asym_envelope",
            "log_asym_envelope",
            "pass",
        ],
    );
    rep.meta("label", &r.label);
    rep.meta("sigma1", r.sigma1);
    rep.meta("sigma2", r.sigma2);
    rep.meta("v", r.v);
    rep.meta("envelope", r.envelope);
    rep.meta("violations", r.violations);
    rep.meta("max_violation", r.max_violation);
    for row in &r.rows {
        let (lower, log_lower) = match row.lower_log {
            Some(l) => (Cell::exp(l), Cell::log(l)),
            None => (Cell::Empty, Cell::Empty),
        };
        let (asym, log_asym) = match row.asym_envelope_log {
            Some(l) => (Cell::Lin(l.exp()), Cell::Log(l)),
            None => (Cell::Empty, Cell::Empty),
        };
        rep.push(vec![
            Cell::Int(row.n),
            Cell::exp(row.tau_log),
            Cell::log(row.tau_log),
            lower,
            log_lower,
            Cell::exp(row.upper_log),
            Cell::log(row.upper_log),
            Cell::Lin(row.delta_best),
            asym,
            log_asym,
            Cell::Bool(row.pass()),
        ]);
    }
    let fail = (!r.all_pass()).then(|| format!("{} rows violate a bound (max {:.3e} in log units)", r.violations, r.max_violation));
    Ok((rep, fail))
}

fn tract(cli: &Cli, a: &TractArgs, p: Precision) -> Out {
    let spec = FamilySpec::load(&a.family_spec).map_err(Fail::Usage)?;
    let family = spec.build(p)?;
    let d_range = match &a.d_range {
        Some(s) => parse_d_range(s).map_err(Fail::Usage)?,
        None => default_d_range(),
    };
    let mut policy = FitPolicy::default();
    if !a.eps_grid.is_empty() {
        policy.eps_grid = a.eps_grid.clone();
    }
    let v = classify(&family, &d_range, &policy)?;
    let mut columns: Vec<String> =
        ["d", "smoothness", "a2", "a2_lower", "a2_upper", "surrogate"].map(String::from).to_vec();
    columns.extend(policy.eps_grid.iter().map(|e| format!("n_eps_{e}")));
    let mut cfg = config(cli, a, p);
    cfg["family_spec"] = serde_json::to_value(&spec).unwrap_or_default();
    let mut rep = Report::new("tract", cfg, columns);
    rep.meta("verdict", v.verdict);
    rep.meta("summary", v.summary());
    rep.meta("slope", v.slope);
    rep.meta("r_squared", v.r_squared);
    rep.meta("min_max_ratio", v.min_max_ratio);
    rep.meta("policy", &v.policy);
    rep.meta("diagnostics", &v.diagnostics);
    for s in &v.samples {
        let (lo, hi) = s.a2_bracket.map_or((Cell::Empty, Cell::Empty), |(l, h)| (Cell::Lin(l), Cell::Lin(h)));
        let mut row = vec![Cell::Int(s.d as u64), Cell::Lin(s.smoothness), Cell::Lin(s.a2), lo, hi, Cell::Bool(s.surrogate)];
        row.extend(s.complexity.iter().map(|(_, n)| n.clone().map_or(Cell::Text("exceeds-ceiling".into()), Cell::Count)));
        rep.push(row);
    }
    Ok((rep, None))
}

fn verify_cmd(cli: &Cli, a: &VerifyArgs, p: Precision) -> Out {
    let rows = verify::run(a.seed, a.cases, p)?;
    let mut rep = Report::new("verify", config(cli, a, p), verify::COLUMNS.to_vec());
    let failed: Vec<&str> = rows.iter().filter(|r| r.failures > 0).map(|r| r.name).collect();
    for r in &rows {
        rep.push(r.cells());
    }
    let fail = (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", ")));
    Ok((rep, fail))
}

fn execute(cli: &Cli) -> Result<Option<String>, Fail> {
    let precision = Precision::from_env().map_err(|e| Fail::Usage(format!("TENSORPOW_PRECISION: {e}")))?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Fail::Usage(format!("--threads: {e}")))?;
    }
    let (report, fail) = match &cli.command {
        Command::Spectrum(a) => spectrum(cli, a, precision),
        Command::Count(a) => count(cli, a, precision),
        Command::Tau(a) => tau(cli, a, precision),
        Command::Bounds(a) => bounds(cli, a, precision),
        Command::Tract(a) => tract(cli, a, precision),
        Command::Verify(a) => verify_cmd(cli, a, precision),
    }?;
    let text = report.render(cli.format);
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(Fail::Io)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(Fail::Io)?;
            out.flush().map_err(Fail::Io)?;
        }
    }
    match fail {
        Some(msg) => Err(Fail::Check(msg)),
        None => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match execute(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(64)
        }
        Err(Fail::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_invariant_violation() { 3 } else { 2 })
        }
        Err(Fail::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
        Err(Fail::Io(e)) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..256").unwrap(), 2..=256);
        assert_eq!(parse_range("2..=9").unwrap(), 2..=9);
        assert!(parse_range("2-9").is_err());
        assert_eq!(parse_d_range("4..32").unwrap(), vec![4, 8, 16, 32]);
        assert_eq!(parse_d_range("3,5,7").unwrap(), vec![3, 5, 7]);
        assert!(parse_d_range("0..4").is_err());
    }

    #[test]
    fn cli_definition() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
