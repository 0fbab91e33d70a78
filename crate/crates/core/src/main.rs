use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cat_discord::discord::BruteForceOptions;
use cat_discord::sweep::{self, Method, MethodSet, PGrid, ResultRow, SweepConfig};
use cat_discord::validate::{self, ValidateOptions};
use cat_discord::{CatSpec, Error, Parity};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SINGULAR: u8 = 3;

#[derive(Parser)]
#[command(name = "cat-discord", version, about = "Geometric discord of reduced cat states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single (n, k, p, parity) point.
    Compute(ComputeArgs),
    /// Evaluate a grid of points and write CSV or JSON.
    Sweep(SweepArgs),
    /// Run the invariant suite.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Parity {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Discord routes to evaluate.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::All])]
    method: Vec<Method>,
    /// Allowed spread between routes before a row is flagged.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    #[arg(long, value_enum, default_value_t = ParityArg::Even)]
    parity: ParityArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Total qubit counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Reduced sizes; pairs with k > n are dropped.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    p_start: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    p_end: f64,
    #[arg(long, default_value_t = 101)]
    p_steps: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ParityArg::Even, ParityArg::Odd])]
    parity: Vec<ParityArg>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for the random overlap draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Perturb recursive tensors by this amount (test mode).
    #[arg(long, hide = true)]
    inject_fault: Option<f64>,
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_rows(rows: &[ResultRow], common: &Common) -> io::Result<()> {
    let mut out = open_out(&common.out)?;
    match common.format {
        Format::Csv => sweep::write_csv(rows, &mut out)?,
        Format::Json => sweep::write_json(rows, &mut out)?,
    }
    out.flush()
}

fn fail(msg: impl std::fmt::Display, code: u8) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::SingularNormalization { .. } => EXIT_SINGULAR,
        Error::Invariant(_) => EXIT_VALIDATION,
        _ => EXIT_USAGE,
    }
}

fn config(ns: Vec<usize>, ks: Vec<usize>, p: PGrid, parities: Vec<Parity>, common: &Common) -> SweepConfig {
    SweepConfig {
        ns,
        ks,
        p,
        parities,
        methods: MethodSet::from_methods(&common.method),
        tol: common.tol,
        brute: BruteForceOptions::default(),
    }
}

fn compute(args: ComputeArgs) -> ExitCode {
    let parity = Parity::from(args.parity);
    if let Err(e) = CatSpec::new(args.n, args.p, parity) {
        return fail(&e, error_code(&e));
    }
    if args.k < 2 || args.k > args.n {
        return fail(format!("k must satisfy 2 <= k <= n, got k = {}, n = {}", args.k, args.n), EXIT_USAGE);
    }
    let grid = match PGrid::new(args.p, args.p, 1) {
        Ok(g) => g,
        Err(e) => return fail(&e, EXIT_USAGE),
    };
    let cfg = config(vec![args.n], vec![args.k], grid, vec![parity], &args.common);
    let rows = match sweep::run_sweep(&cfg, args.common.jobs) {
        Ok(r) => r,
        Err(e) => return fail(&e, error_code(&e)),
    };
    if let Err(e) = write_rows(&rows, &args.common) {
        return fail(e, EXIT_USAGE);
    }
    if rows.iter().any(|r| r.has_error()) {
        return ExitCode::from(EXIT_VALIDATION);
    }
    ExitCode::SUCCESS
}

fn run_sweep(args: SweepArgs) -> ExitCode {
    let grid = match PGrid::new(args.p_start, args.p_end, args.p_steps) {
        Ok(g) => g,
        Err(e) => return fail(&e, EXIT_USAGE),
    };
    let parities = args.parity.iter().map(|&p| p.into()).collect();
    let cfg = config(args.n, args.k, grid, parities, &args.common);
    let rows = match sweep::run_sweep(&cfg, args.common.jobs) {
        Ok(r) => r,
        Err(e) => return fail(&e, error_code(&e)),
    };
    for row in rows.iter().filter(|r| r.is_singular()) {
        eprintln!("skipped singular point n={} k={} p={} m={}", row.n, row.k, row.p, row.m);
    }
    if let Err(e) = write_rows(&rows, &args.common) {
        return fail(e, EXIT_USAGE);
    }
    ExitCode::SUCCESS
}

fn run_validate(args: ValidateArgs) -> ExitCode {
    let opts = ValidateOptions {
        max_n: args.max_n,
        tol: args.tol,
        seed: args.seed,
        inject_fault: args.inject_fault,
        ..Default::default()
    };
    let report = match validate::run(&opts) {
        Ok(r) => r,
        Err(e) => return fail(&e, EXIT_USAGE),
    };
    match args.format {
        ReportFormat::Json => match serde_json::to_string_pretty(&report) {
            Ok(s) => println!("{s}"),
            Err(e) => return fail(e, EXIT_USAGE),
        },
        ReportFormat::Text => print!("{report}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Compute(a) => compute(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Validate(a) => run_validate(a),
    }
}
