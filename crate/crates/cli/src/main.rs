//! `lncat`: test equality of log-normal means from a CSV file, or estimate
//! size and power of the tests by simulation.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure.

mod input;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lncat::{analyze_cat, run_lrt, sim::run_study_with_id, GroupEstimate, Scenario, StudyResult};

use crate::report::{GroupReport, TestReport};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<lncat::Error> for CliError {
    fn from(e: lncat::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "lncat",
    version,
    about = "Tests for equality of log-normal population means"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test equality of means for the groups in a `group,value` CSV file
    Test(TestArgs),
    /// Run size/power simulation studies described by a JSON scenario file
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Cat,
    Lrt,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args, Debug)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cat")]
    method: MethodArg,
    /// Number of CAT replicates
    #[arg(long, default_value_t = lncat::DEFAULT_REPLICATES)]
    replicates: usize,
    /// Master seed; a random one is generated and printed when absent
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads, 0 = one per core
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    /// Scenario JSON: a single scenario object or an array of them
    #[arg(long)]
    input: PathBuf,
    /// Results file; `.json` gives JSON, anything else CSV
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => with_threads(args.threads, || cmd_test(&args)),
        Command::Simulate(args) => with_threads(args.threads, || cmd_simulate(&args)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lncat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn with_threads<F>(threads: usize, f: F) -> Result<(), CliError>
where
    F: FnOnce() -> Result<(), CliError> + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {threads} threads: {e}")))?;
    pool.install(f)
}

fn cmd_test(args: &TestArgs) -> Result<(), CliError> {
    if let Some(out) = &args.output {
        check_output_dir(out)?;
    }
    let table = input::read_table(&args.input)?;
    let samples = table.samples()?;
    let estimates = samples
        .iter()
        .map(|s| GroupEstimate::from_summary(&s.summary()))
        .collect::<lncat::Result<Vec<_>>>()?;
    let groups: Vec<GroupReport> = table
        .labels()
        .zip(&estimates)
        .map(|(label, e)| GroupReport::new(label, e))
        .collect();

    let report = match args.method {
        MethodArg::Cat => {
            let seed = args.seed.unwrap_or_else(|| {
                let seed = rand::random();
                eprintln!("seed: {seed}");
                seed
            });
            let analysis = analyze_cat(&samples, args.replicates, seed, args.alpha)?;
            TestReport::new(groups, &analysis.result, Some(&analysis))
        }
        MethodArg::Lrt => TestReport::new(groups, &run_lrt(&samples, args.alpha)?, None),
    };

    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match &args.output {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
        }
    }
}

fn read_scenarios(path: &Path) -> Result<Vec<(String, Scenario)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let scenarios = match value {
        serde_json::Value::Array(_) => serde_json::from_value::<Vec<Scenario>>(value),
        _ => serde_json::from_value::<Scenario>(value).map(|s| vec![s]),
    }
    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if scenarios.is_empty() {
        return Err(CliError::Input(format!("{}: no scenarios", path.display())));
    }
    scenarios
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let id = s.id.clone().unwrap_or_else(|| i.to_string());
            s.validate()
                .map_err(|e| CliError::Input(format!("scenario {id}: {e}")))?;
            Ok((id, s))
        })
        .collect()
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    check_output_dir(&args.output)?;
    let scenarios = read_scenarios(&args.input)?;
    let results = scenarios
        .into_iter()
        .map(|(id, s)| run_study_with_id(&s, id).map_err(CliError::from))
        .collect::<Result<Vec<StudyResult>, _>>()?;

    let bytes = if args.output.extension().is_some_and(|e| e == "json") {
        let mut s = serde_json::to_string_pretty(&results).expect("results serialize");
        s.push('\n');
        s.into_bytes()
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in results.iter().flat_map(StudyResult::csv_rows) {
            w.serialize(row).expect("in-memory CSV write");
        }
        w.into_inner().expect("in-memory CSV flush")
    };
    write_atomic(&args.output, &bytes)?;
    print!("{}", report::study_table(&results));
    let _ = std::io::stdout().flush();
    Ok(())
}

fn output_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn check_output_dir(path: &Path) -> Result<(), CliError> {
    let dir = output_dir(path);
    if dir.is_dir() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "output directory {} does not exist (for {})",
            dir.display(),
            path.display()
        )))
    }
}

/// Writes to a temporary file next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    check_output_dir(path)?;
    let io_err = |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(output_dir(path)).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
