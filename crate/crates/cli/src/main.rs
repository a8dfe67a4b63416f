use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pclass::case::{self, CaseSpec, RunLog, EXIT_BACKEND, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "pclass", version, about = "Galois module structure of p-th power classes in Kummer extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Local,
    Quadratic,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one extension and print a JSON report.
    Analyze {
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value = "local")]
        backend: BackendArg,
        /// Residue characteristic of the local base field.
        #[arg(long)]
        ell: Option<u64>,
        /// Element expression, e.g. `pi*u^2` or `-3`.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Working precision in uniformizer digits of the base field.
        #[arg(long, env = "PCLASS_PRECISION")]
        precision: Option<u32>,
        #[arg(long, default_value_t = case::DEFAULT_SEED)]
        seed: u64,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run log (JSON lines, appended).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run every case of a JSON-lines corpus.
    Verify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, env = "PCLASS_PRECISION")]
        precision: Option<u32>,
        #[arg(long, default_value_t = case::DEFAULT_SEED)]
        seed: u64,
        /// Summary path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run log; defaults to `pclass-run.jsonl`.
        #[arg(long, default_value = "pclass-run.jsonl")]
        log: PathBuf,
    },
    /// Decompose random modules and check the round trip.
    Random {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 20)]
        dim: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = case::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), i32> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n")).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_CONFIG
        }),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn open_log(path: &Path) -> Result<RunLog, i32> {
    RunLog::open(path).map_err(|e| {
        eprintln!("error: cannot open log {}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn run(cli: Cli) -> Result<i32, i32> {
    match cli.command {
        Command::Analyze {
            p,
            backend,
            ell,
            a,
            precision,
            seed,
            out,
            log,
        } => {
            let spec = match backend {
                BackendArg::Local => CaseSpec {
                    ell,
                    ..CaseSpec::local(0, p, &a)
                },
                BackendArg::Quadratic => {
                    if ell.is_some() {
                        eprintln!("error: the quadratic backend takes no --ell");
                        return Err(EXIT_CONFIG);
                    }
                    CaseSpec {
                        p,
                        ..CaseSpec::quadratic(&a)
                    }
                }
            };
            let log = log.as_deref().map(open_log).transpose()?;
            let (result, _) = case::run_logged(&spec, seed, precision, log.as_ref()).map_err(|e| {
                eprintln!("error: cannot append to log: {e}");
                EXIT_CONFIG
            })?;
            let code = case::exit_code(&result);
            match &result {
                Ok(report) => {
                    emit(&report.to_json(), out.as_deref())?;
                    let failed = report.failed_checks();
                    if !failed.is_empty() {
                        eprintln!("failed checks: {}", failed.join(", "));
                    }
                }
                Err(e) => eprintln!("error: {e}"),
            }
            Ok(code)
        }
        Command::Verify {
            corpus,
            precision,
            seed,
            out,
            log,
        } => {
            let cases = case::read_corpus(&corpus).map_err(|e| {
                eprintln!("error: {e}");
                EXIT_CONFIG
            })?;
            let log = open_log(&log)?;
            let (summary, _) = case::verify(&cases, seed, precision, Some(&log)).map_err(|e| {
                eprintln!("error: cannot append to log: {e}");
                EXIT_BACKEND
            })?;
            emit(&serde_json::to_string_pretty(&summary).expect("summary serializes"), out.as_deref())?;
            eprintln!(
                "{} cases: {} passed, {} failed, {} config errors, {} backend errors",
                summary.cases, summary.passed, summary.failed, summary.config_errors, summary.backend_errors
            );
            Ok(summary.exit_code())
        }
        Command::Random {
            p,
            dim,
            trials,
            seed,
            out,
        } => {
            let summary = case::random_suite(p, dim, trials, seed).map_err(|e| {
                eprintln!("error: {e}");
                EXIT_CONFIG
            })?;
            emit(&serde_json::to_string_pretty(&summary).expect("summary serializes"), out.as_deref())?;
            Ok(if summary.failures == 0 { EXIT_OK } else { case::EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let code = run(Cli::parse()).unwrap_or_else(|c| c);
    ExitCode::from(code as u8)
}
