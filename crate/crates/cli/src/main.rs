mod compute;
mod output;
mod run_spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pressure_core::document::SystemDocument;
use pressure_core::report::{rate_curves, ResultFile};
use pressure_core::verify::{run_suite, SuiteInput};
use pressure_core::Error;

use run_spec::RunSpec;

/// Exit statuses.
const OK: u8 = 0;
const INPUT: u8 = 2;
const INVARIANT: u8 = 3;
const INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "pressure", version, about = "Pressures of subsets and measures of symbolic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute pressures for the sets and measures of a system document
    Compute(ComputeArgs),
    /// Run a named verification suite
    Verify(VerifyArgs),
    /// Turn result files into CSV rate curves, one file per quantity
    Report(ReportArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// System document (JSON)
    #[arg(long)]
    system: Option<PathBuf>,
    /// Quantities to compute, comma separated (default: the four set pressures)
    #[arg(long, value_delimiter = ',')]
    quantity: Vec<String>,
    /// Sets of the document to use (default: all)
    #[arg(long)]
    set: Vec<String>,
    /// Measures of the document to use (default: all)
    #[arg(long)]
    measure: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<usize>>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    delta_list: Option<Vec<f64>>,
    #[arg(long)]
    depth_cap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest acceptable bracket half-width; wider results exit with status 4
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run spec whose fields override the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name
    suite: String,
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long)]
    measure: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the suite's own tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Write the suite report as JSON
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Result files written by `compute`
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Directory for the CSV files
    #[arg(long)]
    out: PathBuf,
}

fn status(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Precondition(_) => INPUT,
        Error::Invariant(_) => INVARIANT,
        Error::Budget(_) | Error::InsufficientPrecision(_) => INCONCLUSIVE,
    }
}

fn set_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("PRESSURE_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| Error::Input(format!("PRESSURE_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(Error::Input("PRESSURE_THREADS must be at least 1".into()));
    }
    // a second initialization only happens in tests; the first pool stays
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn compute_cmd(args: ComputeArgs) -> Result<u8, Error> {
    let mut spec = RunSpec {
        system: args.system,
        quantity: args.quantity,
        set: args.set,
        measure: args.measure,
        m_list: args.m_list,
        n_max: args.n_max,
        delta_list: args.delta_list,
        depth_cap: args.depth_cap,
        seed: args.seed,
        tol: args.tol,
        out: args.out,
    };
    if let Some(path) = &args.config {
        spec.overlay(RunSpec::load(path)?);
    }
    spec.validate()?;
    let run = compute::compute(&spec)?;
    let text = run.file.to_json();
    match &spec.out {
        Some(path) => output::write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    for note in &run.inconclusive {
        eprintln!("inconclusive: {note}");
    }
    Ok(if run.inconclusive.is_empty() { OK } else { INCONCLUSIVE })
}

fn verify_cmd(args: VerifyArgs) -> Result<u8, Error> {
    let mut spec = RunSpec { system: args.system, measure: args.measure, seed: args.seed, tol: args.tol, out: args.out, ..RunSpec::default() };
    if let Some(path) = &args.config {
        spec.overlay(RunSpec::load(path)?);
    }
    spec.validate()?;
    let document = spec.system.as_deref().map(SystemDocument::load).transpose()?;
    let input = SuiteInput { seed: spec.seed.unwrap_or(0), tol: spec.tol, document: document.as_ref(), measures: spec.measure.clone() };
    let report = run_suite(&args.suite, &input)?;
    for c in &report.checks {
        println!("{}  gap={:.3e}  limit={:.3e}  {}", if c.pass { "PASS" } else { "FAIL" }, c.gap, c.limit, c.name);
    }
    for note in &report.notes {
        println!("NOTE  {note}");
    }
    let failed = report.failures().count();
    println!("{}: {} of {} checks passed", report.suite, report.checks.len() - failed, report.checks.len());
    if let Some(path) = &spec.out {
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::Invariant(e.to_string()))?;
        text.push('\n');
        output::write_atomic(path, text.as_bytes())?;
    }
    Ok(if report.passed() { OK } else { INVARIANT })
}

fn report_cmd(args: ReportArgs) -> Result<u8, Error> {
    let mut records = Vec::new();
    for path in &args.input {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let file = ResultFile::from_json(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        records.extend(file.records);
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Input(format!("{}: {e}", args.out.display())))?;
    for (quantity, csv) in rate_curves(&records)? {
        output::write_atomic(&args.out.join(format!("{quantity}.csv")), csv.as_bytes())?;
    }
    Ok(OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = set_threads().and_then(|_| match cli.command {
        Command::Compute(a) => compute_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Report(a) => report_cmd(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(status(&e))
        }
    }
}
