//! `walsh-fup`: builds the Cantor sets, checks their regularity, certifies the
//! Walsh counterexample space, runs norm sweeps and the invariant suite.
//!
//! Exit codes: 0 on success, 1 when a check or verification fails, 2 on a
//! usage error.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use walsh_fup::certificate::certify;
use walsh_fup::fractal::{lebesgue_bound_check, natural_scale_range, regularity_report, CellSet, FractalParams};
use walsh_fup::fup::{beta_fit_records, sweep, write_csv, Family, FupRecord, SweepSpec, TransformKind};
use walsh_fup::verify;

pub const THREADS_ENV: &str = "WALSH_FUP_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "walsh-fup", version, about = "Walsh fractal uncertainty experiments")]
pub struct Cli {
    /// File of `key = value` lines mirroring long flags; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the cells of X_n and Y_n.
    Sets {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Regularity constant of X_n or Y_n and the measure bound it implies.
    Regularity {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum)]
        side: SideArg,
        /// Defaults to m2 / (m1 + m2).
        #[arg(long)]
        delta: Option<f64>,
        /// Smallest scale; defaults to one cell.
        #[arg(long)]
        alpha0: Option<f64>,
        /// Largest scale; defaults to the whole range.
        #[arg(long)]
        alpha1: Option<f64>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Build the explicit family, certify its rank and print a JSON report.
    Certify {
        #[command(flatten)]
        params: ParamArgs,
        /// Also compute the exact null-space dimension.
        #[arg(long)]
        exact_dim: bool,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Restricted operator norms over a range of levels.
    Fup(FupArgs),
    /// Run the invariant suite.
    Verify {
        /// `all` or one of dyadic, transform, fractal, certificate, fup.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub m1: u32,
    #[arg(long)]
    pub m2: u32,
    #[arg(long)]
    pub n: u32,
}

impl ParamArgs {
    fn params(&self) -> Result<FractalParams, String> {
        FractalParams::new(self.m1, self.m2, self.n).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Walsh,
    Dft,
}

impl From<TransformArg> for TransformKind {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Walsh => TransformKind::Walsh,
            TransformArg::Dft => TransformKind::Dft,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("family").required(true).args(["m1", "base"])))]
pub struct FupArgs {
    /// One or more of walsh, dft, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub transform: Vec<TransformArg>,
    #[arg(long, requires = "m2")]
    pub m1: Option<u32>,
    #[arg(long, requires = "m1")]
    pub m2: Option<u32>,
    /// Cantor set over `--alphabet` in this base instead of `--m1/--m2`.
    #[arg(long, requires = "alphabet", conflicts_with_all = ["m1", "m2"])]
    pub base: Option<u64>,
    /// Digits, comma or `|` separated.
    #[arg(long, requires = "base", value_parser = parse_alphabet)]
    pub alphabet: Option<Alphabet>,
    /// Inclusive `A..B`.
    #[arg(long, value_parser = parse_range)]
    pub n_range: (u32, u32),
    #[arg(long, default_value_t = walsh_fup::fup::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// SVG chart of log sigma_max against log N.
    #[arg(long, value_name = "PATH.svg")]
    pub plot: Option<PathBuf>,
}

pub fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: u32 = a.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    if a == 0 || a > b {
        return Err(format!("range {s:?} must satisfy 1 <= A <= B"));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet(pub Vec<u64>);

pub fn parse_alphabet(s: &str) -> Result<Alphabet, String> {
    s.split([',', '|'])
        .map(|d| d.trim().parse::<u64>().map_err(|_| format!("bad digit {d:?}")))
        .collect::<Result<_, _>>()
        .map(Alphabet)
}

enum Failure {
    Usage(String),
    Check(String),
}

fn usage<E: ToString>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Check(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Parses `argv` (program name first), merges the config file and dispatches.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::apply(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = threads_from_env().and_then(|threads| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(usage)?;
        pool.install(|| dispatch(cli.command))
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Check(msg)) => {
            eprintln!("failed: {msg}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sets { params, json } => sets(&params, json.as_deref()),
        Command::Regularity { params, side, delta, alpha0, alpha1, json } => {
            regularity(&params, side, delta, alpha0, alpha1, json.as_deref())
        }
        Command::Certify { params, exact_dim, json } => certify_cmd(&params, exact_dim, json.as_deref()),
        Command::Fup(args) => fup(&args),
        Command::Verify { suite } => verify_cmd(&suite),
    }
}

const LISTED_CELLS: usize = 64;

fn cell_list(s: &CellSet) -> String {
    let mut out = String::from("{");
    for (i, c) in s.indices().iter().take(LISTED_CELLS).enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{c}");
    }
    if s.len() > LISTED_CELLS {
        let _ = write!(out, ",... ({} cells)", s.len());
    }
    out.push('}');
    out
}

fn sets(args: &ParamArgs, json: Option<&Path>) -> Result<(), Failure> {
    let p = args.params().map_err(usage)?;
    let x = p.x_set().map_err(usage)?;
    let y = p.y_set().map_err(usage)?;
    println!(
        "m1={} m2={} n={} L={} M={} N={} delta={}",
        p.m1,
        p.m2,
        p.n,
        p.base(),
        p.digits_per_level(),
        p.resolution(),
        p.delta()
    );
    println!("X cells: {}/{}", cell_list(&x), p.resolution());
    println!("Y cells: {}", cell_list(&y));
    if let Some(path) = json {
        let value = json!({ "params": p, "x": x, "y": y });
        write_file(path, &(serde_json::to_string_pretty(&value).map_err(usage)? + "\n"))?;
    }
    Ok(())
}

fn regularity(
    args: &ParamArgs,
    side: SideArg,
    delta: Option<f64>,
    alpha0: Option<f64>,
    alpha1: Option<f64>,
    json: Option<&Path>,
) -> Result<(), Failure> {
    let p = args.params().map_err(usage)?;
    let set = match side {
        SideArg::X => p.x_set(),
        SideArg::Y => p.y_set(),
    }
    .map_err(usage)?;
    let (a0, a1) = natural_scale_range(&set);
    let delta = delta.unwrap_or_else(|| p.delta());
    let report = regularity_report(&set, delta, alpha0.unwrap_or(a0), alpha1.unwrap_or(a1)).map_err(usage)?;
    let bound = lebesgue_bound_check(&set, &report);
    let name = match side {
        SideArg::X => "X",
        SideArg::Y => "Y",
    };
    println!("{name}_{} for m1={} m2={}, {} cells", p.n, p.m1, p.m2, set.len());
    println!("delta = {delta}, scales {} to {}", report.alpha0, report.alpha1);
    println!(
        "c_upper = {}, c_lower = {}, c_r = {} (true constant within a factor {})",
        report.c_upper, report.c_lower, report.c_r, report.bracket_factor
    );
    println!(
        "|{name}| = {} <= 24 c_r^2 alpha1^delta alpha0^(1-delta) = {}: {}",
        bound.measure,
        bound.bound,
        if bound.passed { "pass" } else { "FAIL" }
    );
    if let Some(path) = json {
        let value = json!({ "params": p, "side": set.side(), "report": report, "bound": bound });
        write_file(path, &(serde_json::to_string_pretty(&value).map_err(usage)? + "\n"))?;
    }
    if bound.passed {
        Ok(())
    } else {
        Err(Failure::Check("measure exceeds the regularity bound".into()))
    }
}

fn certify_cmd(args: &ParamArgs, exact_dim: bool, json: Option<&Path>) -> Result<(), Failure> {
    let p = args.params().map_err(usage)?;
    let report = certify(p, exact_dim).map_err(usage)?;
    let text = serde_json::to_string_pretty(&report).map_err(usage)? + "\n";
    print!("{text}");
    if let Some(path) = json {
        write_file(path, &text)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("certificate for {p} does not hold")))
    }
}

fn fup(args: &FupArgs) -> Result<(), Failure> {
    let family = match (args.m1, args.m2, args.base, &args.alphabet) {
        (Some(m1), Some(m2), None, None) => Family::Standard { m1, m2 },
        (None, None, Some(base), Some(alphabet)) => Family::Digits { base, alphabet: alphabet.0.clone() },
        _ => return Err(Failure::Usage("give either --m1 and --m2 or --base and --alphabet".into())),
    };
    let mut transforms: Vec<TransformKind> = Vec::new();
    for t in &args.transform {
        let kind = TransformKind::from(*t);
        if !transforms.contains(&kind) {
            transforms.push(kind);
        }
    }
    let spec = SweepSpec {
        transforms,
        families: vec![family],
        n_range: args.n_range,
        tolerance: args.tolerance,
        output: None,
    };
    let records = sweep(&spec).map_err(usage)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &records).map_err(usage)?;
    match &args.csv {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| io_failure(path, e))?;
            summarize(&records);
        }
        None => {
            let _ = std::io::stdout().write_all(&csv);
        }
    }
    if let Some(path) = &args.plot {
        write_file(path, &plot::render(&records))?;
    }
    let failed: Vec<String> = records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{} n={}: {e}", r.transform, r.n)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join("; ")))
    }
}

fn summarize(records: &[FupRecord]) {
    for kind in [TransformKind::Walsh, TransformKind::Dft] {
        let series: Vec<FupRecord> = records.iter().filter(|r| r.transform == kind).cloned().collect();
        if series.is_empty() {
            continue;
        }
        for r in &series {
            let sigma = r.sigma_max.map_or_else(|| "-".to_string(), |s| format!("{s:.12}"));
            println!("{kind} n={} N={} sigma_max={sigma}", r.n, r.resolution);
        }
        if let Ok(fit) = beta_fit_records(&series) {
            println!("{kind} fitted beta = {:.6} (rms residual {:.2e})", fit.beta, fit.residual);
        }
    }
}

fn verify_cmd(name: &str) -> Result<(), Failure> {
    let checks = verify::suite(name)
        .ok_or_else(|| Failure::Usage(format!("unknown suite {name:?}; use all or one of {}", verify::MODULES.join(", "))))?;
    let stdout = std::io::stdout();
    let summary = verify::run_checks(&checks, &mut stdout.lock()).map_err(usage)?;
    if summary.all_passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} of {} checks failed", summary.failed(), summary.outcomes.len())))
    }
}
