//! Command-line front end: compute eigenvalue tables, combine per-component
//! spectra, and emit the two counterexample reports with an SVG scatter.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pqlab::calculus::{combine, Selection};
use pqlab::domain::{ComponentDomain, Config, ExponentMode, Exponents, Method};
use pqlab::error::Error;
use pqlab::oracle;
use pqlab::report::{bi_union_report, ls_mismatch_certificate, shrinking_tail_report};
use pqlab::shoot::component_eigenvalue;
use pqlab::svg;

#[derive(Parser)]
#[command(name = "pqlab", about = "(p,q)-eigenvalues of the p-Laplacian: solvers, \
    combination calculus for disjoint unions, and counterexample reports", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue table of a single interval or ball.
    Eigen(EigenArgs),
    /// Combine per-component eigenvalues into a union eigenvalue.
    Combine(CombineArgs),
    /// Counterexample reports.
    #[command(subcommand)]
    Example(ExampleCommand),
}

#[derive(Args)]
struct ExponentArgs {
    /// Exponent p.
    #[arg(long)]
    p: f64,
    /// Exponent q.
    #[arg(long)]
    q: f64,
    /// Allow q = p (classical p-Laplacian calibration mode).
    #[arg(long)]
    calibration: bool,
}

impl ExponentArgs {
    fn build(&self) -> Result<Exponents, Error> {
        let mode = if self.calibration { ExponentMode::Calibration } else { ExponentMode::Strict };
        Exponents::new(self.p, self.q, mode)
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// Override both ODE integrator tolerances.
    #[arg(long)]
    ode_tol: Option<f64>,
    /// Iteration cap of the variational minimizer.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed for the minimizer's random restarts.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random restarts of the minimizer (default 0).
    #[arg(long)]
    restarts: Option<usize>,
}

impl ConfigArgs {
    fn build(&self) -> Config {
        let mut cfg = Config::default();
        if let Some(tol) = self.ode_tol {
            cfg.ode_abs_tol = tol;
            cfg.ode_rel_tol = tol;
        }
        if let Some(n) = self.max_iters {
            cfg.max_minimize_iters = n;
        }
        if let Some(s) = self.seed {
            cfg.restart_seed = s;
        }
        if let Some(r) = self.restarts {
            cfg.random_restarts = r;
        }
        cfg
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    exponents: ExponentArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Interval length L.
    #[arg(long, conflicts_with = "ball")]
    interval: Option<f64>,
    /// Ball as dimension and radius: --ball N R.
    #[arg(long, num_args = 2, value_names = ["N", "R"])]
    ball: Option<Vec<f64>>,
    /// Index or index range, e.g. 1 or 1..5.
    #[arg(long, default_value = "1")]
    k: String,
    /// Cross-run the variational oracle for k = 1 and print the deviation.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CombineArgs {
    #[command(flatten)]
    exponents: ExponentArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// JSON file with {"components": [[lambda, ...], ...]}.
    #[arg(long)]
    spectra: PathBuf,
    /// Per-component choice: 1-based eigenvalue index or '-' to skip,
    /// comma separated, e.g. 2,-,1.
    #[arg(long)]
    select: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExampleCommand {
    /// Two-component union: eigenvalues accumulating below a fixed one.
    Bi(BiArgs),
    /// Infinite union of shrinking balls: non-isolated first eigenvalue.
    Tail(TailArgs),
}

#[derive(Args)]
struct BiArgs {
    #[command(flatten)]
    exponents: ExponentArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Interval lengths of the two components: --L BIG SMALL.
    #[arg(long = "L", num_args = 2, value_names = ["BIG", "SMALL"])]
    lengths: Vec<f64>,
    /// Index of the fixed eigenvalue of the large component.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Number of accumulation-table rows.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Output directory for report.json, report.csv, spectrum.svg.
    #[arg(long, default_value = "bi_out")]
    out: PathBuf,
}

#[derive(Args)]
struct TailArgs {
    #[command(flatten)]
    exponents: ExponentArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Ambient dimension of the balls.
    #[arg(long, default_value_t = 1)]
    dim: u32,
    /// Radius of the largest ball.
    #[arg(long)]
    r0: f64,
    /// Geometric radius ratio in (0, 1).
    #[arg(long)]
    rho: f64,
    /// Number of partial-union rows.
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Output directory for report.json, report.csv, spectrum.svg.
    #[arg(long, default_value = "tail_out")]
    out: PathBuf,
}

#[derive(Serialize)]
struct EigenRow {
    k: usize,
    lambda: f64,
    method: Method,
}

#[derive(Serialize)]
struct VerifyBlock {
    oracle_lambda: f64,
    relative_deviation: f64,
}

#[derive(Serialize)]
struct EigenOutput {
    schema: u32,
    p: f64,
    q: f64,
    domain: ComponentDomain,
    rows: Vec<EigenRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<VerifyBlock>,
}

fn parse_k_range(spec: &str) -> Result<(usize, usize), Error> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidInput(format!("bad index '{}'", s)))
    };
    let (lo, hi) = match spec.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let k = parse(spec)?;
            (k, k)
        }
    };
    if lo < 1 || hi < lo {
        return Err(Error::InvalidInput(format!("bad index range '{}'", spec)));
    }
    Ok((lo, hi))
}

fn run_eigen(args: &EigenArgs) -> Result<String, Error> {
    let exponents = args.exponents.build()?;
    let cfg = args.config.build();
    let domain = match (&args.interval, &args.ball) {
        (Some(length), None) => ComponentDomain::interval(*length)?,
        (None, Some(nr)) => {
            let dim = nr[0] as u32;
            if nr[0].fract() != 0.0 || dim < 1 {
                return Err(Error::InvalidInput(format!("ball dimension {} must be a positive integer", nr[0])));
            }
            ComponentDomain::ball(nr[1], dim)?
        }
        _ => return Err(Error::InvalidInput("give exactly one of --interval or --ball".into())),
    };
    let (k_lo, k_hi) = parse_k_range(&args.k)?;

    let mut rows = Vec::new();
    for k in k_lo..=k_hi {
        let pair = component_eigenvalue(&exponents, &domain, k, &cfg)?;
        rows.push(EigenRow { k, lambda: pair.value, method: pair.method });
    }

    let verify = if args.verify {
        let length = match domain {
            ComponentDomain::Interval { length } => length,
            ComponentDomain::Ball { radius, dim: 1 } => 2.0 * radius,
            _ => {
                return Err(Error::InvalidInput(
                    "--verify needs an interval (the oracle is one-dimensional)".into(),
                ))
            }
        };
        let first = component_eigenvalue(&exponents, &domain, 1, &cfg)?.value;
        let (oracle_lambda, _) =
            oracle::richardson_first(&exponents, length, &[512, 1024, 2048], &cfg)?;
        Some(VerifyBlock {
            oracle_lambda,
            relative_deviation: (oracle_lambda - first).abs() / first,
        })
    } else {
        None
    };

    let output = EigenOutput {
        schema: 1,
        p: exponents.p(),
        q: exponents.q(),
        domain,
        rows,
        verify,
    };
    Ok(match args.format {
        Format::Json => serde_json::to_string_pretty(&output).expect("serialize") + "\n",
        Format::Csv => {
            let mut s = String::from("k,lambda,method\n");
            for r in &output.rows {
                s.push_str(&format!(
                    "{},{},{}\n",
                    r.k,
                    r.lambda,
                    serde_json::to_value(r.method).unwrap().as_str().unwrap()
                ));
            }
            s
        }
    })
}

#[derive(serde::Deserialize)]
struct SpectraFile {
    components: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct CombineOutput {
    schema: u32,
    p: f64,
    q: f64,
    lambda: f64,
    coefficients: Vec<f64>,
    normalization: f64,
}

fn run_combine(args: &CombineArgs) -> Result<String, Error> {
    let exponents = args.exponents.build()?;
    let raw = fs::read_to_string(&args.spectra)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {}", args.spectra.display(), e)))?;
    let file: SpectraFile = serde_json::from_str(&raw)
        .map_err(|e| Error::InvalidInput(format!("malformed spectra file: {}", e)))?;
    let picks: Vec<&str> = args.select.split(',').collect();
    if picks.len() != file.components.len() {
        return Err(Error::InvalidInput(format!(
            "selection has {} entries but the file has {} components",
            picks.len(),
            file.components.len()
        )));
    }
    let mut lambdas = Vec::new();
    for (component, pick) in file.components.iter().zip(&picks) {
        let pick = pick.trim();
        if pick == "-" {
            lambdas.push(None);
            continue;
        }
        let idx: usize = pick
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad selection entry '{}'", pick)))?;
        let lam = component
            .get(idx.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidInput(format!("index {} out of range", idx)))?;
        lambdas.push(Some(*lam));
    }
    let pair = combine(&exponents, &Selection::new(lambdas))?;
    let q = exponents.q();
    let normalization: f64 = pair.coefficients.iter().map(|a| a.abs().powf(q)).sum();
    let output = CombineOutput {
        schema: 1,
        p: exponents.p(),
        q,
        lambda: pair.value,
        coefficients: pair.coefficients,
        normalization,
    };
    Ok(match args.format {
        Format::Json => serde_json::to_string_pretty(&output).expect("serialize") + "\n",
        Format::Csv => {
            let mut s = String::from("i,alpha\n");
            for (i, a) in output.coefficients.iter().enumerate() {
                s.push_str(&format!("{},{}\n", i + 1, a));
            }
            s.push_str(&format!("lambda,{}\n", output.lambda));
            s
        }
    })
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {}", path.display(), e))),
        None => {
            print!("{}", content);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct BiBundle<'a> {
    #[serde(flatten)]
    report: &'a pqlab::report::AccumulationReport,
    certificate: pqlab::report::MismatchCertificate,
}

fn run_example_bi(args: &BiArgs) -> Result<(), Error> {
    let exponents = args.exponents.build()?;
    let cfg = args.config.build();
    if args.lengths.len() != 2 {
        return Err(Error::InvalidInput("--L takes exactly two lengths".into()));
    }
    let big = ComponentDomain::interval(args.lengths[0])?;
    let small = ComponentDomain::interval(args.lengths[1])?;
    let report = bi_union_report(&exponents, &big, &small, args.k, args.n, &cfg)?;
    let certificate = ls_mismatch_certificate(&report)?;

    fs::create_dir_all(&args.out)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {}", args.out.display(), e)))?;
    let bundle = BiBundle { report: &report, certificate };
    let json = serde_json::to_string_pretty(&bundle).expect("serialize") + "\n";
    fs::write(args.out.join("report.json"), json)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(args.out.join("report.csv"), report.to_csv())
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let plot = svg::spectrum_scatter(
        &report.spectrum_values,
        &[report.limit],
        &format!("combined spectrum, p={} q={} k={}", report.p, report.q, report.k),
    );
    fs::write(args.out.join("spectrum.svg"), plot)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    eprintln!(
        "wrote {} ({} rows, {} spectrum values)",
        args.out.display(),
        report.rows.len(),
        report.spectrum_values.len()
    );
    Ok(())
}

fn run_example_tail(args: &TailArgs) -> Result<(), Error> {
    let exponents = args.exponents.build()?;
    let cfg = args.config.build();
    let report = shrinking_tail_report(&exponents, args.dim, args.r0, args.rho, args.n, &cfg)?;

    fs::create_dir_all(&args.out)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {}", args.out.display(), e)))?;
    let json = serde_json::to_string_pretty(&report).expect("serialize") + "\n";
    fs::write(args.out.join("report.json"), json)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(args.out.join("report.csv"), report.to_csv())
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let values: Vec<f64> = report.rows.iter().map(|r| r.lambda_n).collect();
    let plot = svg::spectrum_scatter(
        &values,
        &[report.lambda_union],
        &format!("first eigenvalues of partial unions, p={} q={}", report.p, report.q),
    );
    fs::write(args.out.join("spectrum.svg"), plot)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    eprintln!("wrote {} ({} rows)", args.out.display(), report.rows.len());
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidExponents(_)
        | Error::InvalidDomain(_)
        | Error::InvalidScale(_)
        | Error::InvalidInput(_)
        | Error::EmptySelection
        | Error::TooManyVariants { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eigen(args) => run_eigen(args).and_then(|s| write_or_print(&args.out, &s)),
        Command::Combine(args) => run_combine(args).and_then(|s| write_or_print(&args.out, &s)),
        Command::Example(ExampleCommand::Bi(args)) => run_example_bi(args),
        Command::Example(ExampleCommand::Tail(args)) => run_example_tail(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}
