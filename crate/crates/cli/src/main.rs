//! `fop`: solve linear systems with the A13/B13 solver and verify the
//! relation existence table.

mod report;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fop_core::fixtures::{normal_vector, rng, Generator};
use fop_core::mtx::read_matrix_market;
use fop_core::verify::{verify_relations, VerifyConfig};
use fop_core::{solve, Matrix, SolverConfig, Vector};

use report::{HistoryRow, MatrixInfo, SolveJson};

const EXIT_MAX_ITER: u8 = 1;
const EXIT_BREAKDOWN: u8 = 2;
const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 64;
const EXIT_INPUT: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Output(_) => EXIT_IO,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "fop", version, about = "Formal orthogonal polynomial solver and relation verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve Ax = b and write a JSON report and CSV history.
    Solve(SolveArgs),
    /// Fit the A11/A13/A14/B11/B13 relation forms on seeded fixtures.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["matrix", "gen"]))]
struct SolveArgs {
    /// Matrix Market file (coordinate real general).
    #[arg(long, value_name = "PATH")]
    matrix: Option<PathBuf>,
    /// Generated matrix: identity:N, diag:L1,L2,..., tridiag:N, randsdd:N,SEED, rotblocks:N,SEED.
    #[arg(long, value_name = "NAME:PARAMS")]
    gen: Option<String>,
    /// Right-hand side: ones, rand:SEED or file:PATH.
    #[arg(long, default_value = "ones")]
    rhs: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Iteration cap; defaults to 2n + 10.
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
    #[arg(long, value_name = "N", default_value_t = 5)]
    max_restarts: usize,
    /// Seed for the left vectors drawn on restart.
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Write the residual history as CSV.
    #[arg(long, value_name = "PATH")]
    history: Option<PathBuf>,
    /// Write the solution, one entry per line.
    #[arg(long, value_name = "PATH")]
    solution: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Fixture dimension.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Number of seeded fixtures.
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Seed of the first fixture.
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of after the table on stdout.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fop: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn load_matrix(args: &SolveArgs) -> CliResult<(Matrix, String)> {
    match (&args.matrix, &args.gen) {
        (Some(path), None) => {
            let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
            let m = read_matrix_market(BufReader::new(file))
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Ok((m, path.display().to_string()))
        }
        (None, Some(spec)) => {
            let g: Generator = spec.parse().map_err(|e| CliError::Usage(format!("--gen {spec}: {e}")))?;
            Ok((g.build(), g.to_string()))
        }
        _ => Err(CliError::Usage("exactly one of --matrix and --gen is required".into())),
    }
}

fn read_vector_file(path: &Path) -> CliResult<Vec<f64>> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        for field in trimmed.split_whitespace() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(CliError::Input(format!(
                        "{}: parse error at line {}: invalid number '{field}'",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
    }
    Ok(values)
}

fn load_rhs(spec: &str, n: usize) -> CliResult<Vector> {
    let values = match spec.split_once(':') {
        None if spec == "ones" => return Ok(Vector::ones(n)),
        Some(("rand", seed)) => {
            let seed = seed.parse::<u64>().map_err(|_| CliError::Usage(format!("--rhs {spec}: invalid seed")))?;
            return Ok(normal_vector(n, &mut rng(seed)));
        }
        Some(("file", path)) => read_vector_file(Path::new(path))?,
        _ => return Err(CliError::Usage(format!("--rhs {spec}: expected ones, rand:SEED or file:PATH"))),
    };
    if values.len() != n {
        return Err(CliError::Input(format!("--rhs {spec}: expected {n} values, found {}", values.len())));
    }
    Vector::new(values).map_err(|e| CliError::Input(format!("--rhs {spec}: {e}")))
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

fn write_history(path: &Path, rows: &[HistoryRow]) -> CliResult<()> {
    let out = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row).map_err(out)?;
    }
    w.flush().map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => create(p)?.write_all(text.as_bytes()).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> CliResult<u8> {
    let (a, source) = load_matrix(args)?;
    if !a.is_square() {
        return Err(CliError::Input(format!("{source}: matrix is {} x {}, not square", a.rows(), a.cols())));
    }
    let n = a.rows();
    let b = load_rhs(&args.rhs, n)?;
    let config = SolverConfig {
        tol: args.tol,
        max_iter: args.max_iter,
        max_restarts: args.max_restarts,
        seed: args.seed,
        ..SolverConfig::default()
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let start = Instant::now();
    let (x, report) =
        solve(&a, &b, &Vector::zeros(n), &config).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
    let elapsed = start.elapsed();

    let info = MatrixInfo { source, rows: n, cols: a.cols(), nnz: a.nnz() };
    let json = SolveJson::new(&report, &config, &args.rhs, info);
    let text = serde_json::to_string_pretty(&json).expect("report serializes");
    write_text(args.report.as_deref(), &text)?;
    if let Some(path) = &args.history {
        write_history(path, &HistoryRow::from_report(&report))?;
    }
    if let Some(path) = &args.solution {
        let body: String = x.iter().map(|v| format!("{v:e}\n")).collect();
        write_text(Some(path), &body)?;
    }
    eprintln!(
        "{}: {} after {} iterations, restarts {}, relative residual {:.3e} ({:.1?})",
        json.matrix.source, json.status, json.iterations, json.restarts, json.final_residual, elapsed
    );
    Ok(match report.status {
        fop_core::SolveStatus::Converged => 0,
        fop_core::SolveStatus::MaxIterations => EXIT_MAX_ITER,
        fop_core::SolveStatus::BreakdownExhausted => EXIT_BREAKDOWN,
    })
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<u8> {
    if args.runs == 0 || args.n < 2 {
        return Err(CliError::Usage("verify needs --runs >= 1 and --n >= 2".into()));
    }
    let config = VerifyConfig { n: args.n, runs: args.runs, base_seed: args.seed, ..VerifyConfig::default() };
    let report = verify_relations(&config).map_err(|e| CliError::Input(e.to_string()))?;

    let mut table = String::new();
    table.push_str(&format!(
        "{:<5} {:>2} {:>5} {:>7} {:>8} {:>13} {:>12} {:>6}\n",
        "form", "k", "runs", "skipped", "expected", "consensus", "median", "match"
    ));
    for f in &report.forms {
        let expected = if f.expected_exists { "exists" } else { "absent" };
        let consensus = format!("{:?}", f.consensus).to_lowercase();
        table.push_str(&format!(
            "{:<5} {:>2} {:>5} {:>7} {:>8} {:>13} {:>12.3e} {:>6}\n",
            f.form,
            f.k,
            f.runs,
            f.skipped,
            expected,
            consensus,
            f.median_residual,
            if f.matches { "yes" } else { "no" }
        ));
    }
    print!("{table}");
    io::stdout().flush().ok();

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(args.report.as_deref(), &json)?;
    Ok(if report.all_match { 0 } else { EXIT_MISMATCH })
}
