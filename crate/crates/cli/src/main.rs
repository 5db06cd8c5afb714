use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use nudging::harness::{self, Assertion, ExperimentConfig, RunRecord};
use nudging::NudgingError;

#[derive(Parser)]
#[command(name = "nudging", version, about = "Nudging data assimilation twin experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or a catalog entry by name.
    Run {
        /// Path to a TOML config, or a catalog name such as `fig4`.
        target: String,
        /// Override a config key, e.g. `--set mu=50 --set T=2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Use the long-horizon variant of entries that have one (fig7, fig8).
        #[arg(long)]
        long: bool,
        /// Output directory (default: `$NUDGING_OUTPUT_ROOT/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in experiments.
    Catalog {
        /// Print each entry's full config.
        #[arg(long)]
        show: bool,
        #[arg(long)]
        long: bool,
    },
    /// Run every catalog entry, one worker per entry.
    RunAll {
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        long: bool,
    },
    /// Re-check a finished run directory.
    Verify { dir: PathBuf },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

fn exit_code(e: &NudgingError) -> u8 {
    match e {
        NudgingError::Validation { .. }
        | NudgingError::Config(_)
        | NudgingError::UnknownEntry { .. }
        | NudgingError::Resolution { .. }
        | NudgingError::MalformedField(_) => EXIT_VALIDATION,
        NudgingError::Divergence { .. } | NudgingError::NonFinite => EXIT_DIVERGENCE,
        _ => 1,
    }
}

fn print_assertions(label: &str, assertions: &[Assertion]) {
    for a in assertions {
        println!("{label}: {} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
}

fn summarize(label: &str, record: &RunRecord, dir: &Path) -> u8 {
    print_assertions(label, &record.assertions);
    for w in &record.warnings {
        println!("{label}: warning: {w}");
    }
    println!(
        "{label}: {} in {:.1} s -> {}",
        if record.passed { "passed" } else { "FAILED" },
        record.wall_seconds,
        dir.display()
    );
    if record.passed {
        0
    } else {
        EXIT_VERIFY
    }
}

fn resolve(
    target: &str,
    overrides: &[String],
    long: bool,
) -> Result<(ExperimentConfig, Option<String>, String), NudgingError> {
    let path = Path::new(target);
    if path.is_file() {
        let cfg = ExperimentConfig::from_file(path, overrides)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        return Ok((cfg, None, name));
    }
    let entry = harness::lookup(target, long)?;
    let cfg = entry.config.with_overrides(overrides)?;
    Ok((cfg, Some(entry.name.to_string()), entry.name.to_string()))
}

fn run_one(target: &str, overrides: &[String], long: bool, out: Option<PathBuf>) -> u8 {
    let (cfg, entry, name) = match resolve(target, overrides, long) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let dir =
        out.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| harness::output_dir_for(&name));
    match harness::run(&cfg, entry.as_deref(), &dir) {
        Ok(record) => summarize(&name, &record, &dir),
        Err(e) => {
            eprintln!("{name}: error: {e}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { target, overrides, long, out } => run_one(&target, &overrides, long, out),
        Command::Catalog { show, long } => {
            for e in harness::catalog(long) {
                println!("{:<6} {}{}", e.name, e.summary, if e.has_long_variant { " [--long]" } else { "" });
                if show {
                    match e.config.to_toml_string() {
                        Ok(text) => println!(
                            "{}",
                            text.trim_end().lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
                        ),
                        Err(err) => eprintln!("{}: {err}", e.name),
                    }
                }
            }
            0
        }
        Command::RunAll { jobs, long } => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let names: Vec<&str> = harness::catalog(long).iter().map(|e| e.name).collect();
            let codes: Vec<u8> = pool.install(|| names.par_iter().map(|n| run_one(n, &[], long, None)).collect());
            codes.into_iter().max().unwrap_or(0)
        }
        Command::Verify { dir } => match harness::verify_dir(&dir) {
            Ok(report) => {
                let label = report.entry.clone().unwrap_or_else(|| dir.display().to_string());
                print_assertions(&label, &report.assertions);
                if report.passed() {
                    println!("{label}: passed");
                    0
                } else {
                    println!("{label}: FAILED");
                    EXIT_VERIFY
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                match e {
                    NudgingError::Io(_) | NudgingError::Csv(_) => EXIT_VERIFY,
                    other => exit_code(&other),
                }
            }
        },
    };
    ExitCode::from(code)
}
