use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uf_prognost::ErrorKind;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "uf-prognost", version, about = "UF membrane health and RUL prognostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a sensor log and write the runs-and-cycles artifact.
    Ingest(IngestArgs),
    /// Build an exemplar library from the training runs of an artifact.
    Build(BuildArgs),
    /// Predict RUL for cycles of an artifact.
    Predict(PredictArgs),
    /// Split, build, predict and score; writes a stratified report.
    Evaluate(EvaluateArgs),
    /// Write a synthetic sensor log.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Sensor CSV, or `-` for stdin.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub cycles: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Must match the config embedded in the artifact.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use every run instead of the chronological training split.
    #[arg(long)]
    pub all_runs: bool,
    /// Also write a text dump of the library.
    #[arg(long)]
    pub export_text: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub cycles: PathBuf,
    #[arg(long, requires = "cycle", conflicts_with = "all_test")]
    pub run: Option<usize>,
    #[arg(long, requires = "run")]
    pub cycle: Option<usize>,
    /// Every cycle of every test run with a full window.
    #[arg(long, required_unless_present = "run")]
    pub all_test: bool,
    /// Print rule explanations to stdout instead of JSON.
    #[arg(long)]
    pub explain: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write prediction documents here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub input: Option<PathBuf>,
    /// Built-in synthetic dataset; only `standard` exists.
    #[arg(long, value_parser = ["standard"])]
    pub fixture: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Let retrieval use exemplars from the query's own run.
    #[arg(long)]
    pub allow_same_run: bool,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario TOML file, or `standard`.
    #[arg(long)]
    pub scenario: String,
    /// Output CSV, or `-` for stdout.
    #[arg(long)]
    pub out: PathBuf,
    /// Pipeline config; its `seed` overrides the scenario seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("UF_PROGNOST_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("UF_PROGNOST_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Build(a) => commands::build(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Simulate(a) => commands::simulate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Data => 2,
                ErrorKind::Internal => 3,
            })
        }
    }
}
