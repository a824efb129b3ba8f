use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use cpslint::config::{default_config_path, load_config};
use cpslint::corruptor::{compose, CorruptionJob, CorruptionKind, Records};
use cpslint::fixtures::generate_reference;
use cpslint::inspector::generate_baseline_spec;
use cpslint::runner::{compile, run, RunError, RunOutcome};
use cpslint::table::{read_csv, write_csv};

/// Sanitises CPS time-series CSV traces described by cpslint programs.
#[derive(Parser)]
#[command(name = "cpslint", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program with the pipeline chosen in the config.
    Run {
        spec: PathBuf,
        /// Defaults to config.yaml next to the program.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write a baseline program for a CSV file.
    Inspect {
        input: PathBuf,
        /// Defaults to <input-stem>.cps next to the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the Python script for a program without running it.
    Gen {
        spec: PathBuf,
        /// Defaults to <spec-stem>.py in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Apply corruption patterns to a reference CSV.
    Corrupt {
        reference: PathBuf,
        /// Repeat to compose several jobs, applied in order.
        #[arg(long = "kind", required = true)]
        kinds: Vec<CorruptionKind>,
        #[arg(long, default_value_t = 0.005)]
        rate: f64,
        #[arg(long, default_value_t = 10)]
        block: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        uart_target: Option<String>,
        /// Corrupt only these columns (comma-separated).
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// Out-of-bounds: hit a random subset of the columns in each block.
        #[arg(long)]
        random_subset: bool,
        /// Type mismatch: also inject symbols into UART messages.
        #[arg(long)]
        corrupt_uart: bool,
        /// Defaults to <stem>.<kind>.csv next to the reference.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the synthetic reference trace.
    Fixture {
        #[arg(long, default_value_t = 10_000)]
        rows: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn sibling(path: &Path, name: String) -> PathBuf {
    path.parent().map(|p| p.join(&name)).unwrap_or_else(|| PathBuf::from(name))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn config_for(spec: &Path, explicit: Option<PathBuf>) -> Result<cpslint::RunConfig, RunError> {
    let path = explicit.unwrap_or_else(|| default_config_path(spec));
    Ok(load_config(&path)?)
}

fn report_run_error(e: &RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { spec, config } => {
            let result = config_for(&spec, config).and_then(|cfg| run(&spec, &cfg));
            match result {
                Ok(outcome) => {
                    match &outcome {
                        RunOutcome::Interpreted(report) => {
                            println!("{} steps, log {}", report.steps.len(), report.log_path.display())
                        }
                        RunOutcome::Compiled { script, .. } => println!("script {}", script.display()),
                    }
                    for path in outcome.outputs() {
                        println!("wrote {}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => report_run_error(&e),
            }
        }
        Cmd::Gen { spec, out, config } => {
            match config_for(&spec, config).and_then(|cfg| compile(&spec, &cfg, out.as_deref())) {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => report_run_error(&e),
            }
        }
        cmd => match other(cmd) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}

fn other(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Inspect { input, out } => {
            let source = input.file_name().context("input has no file name")?.to_string_lossy().into_owned();
            let text = generate_baseline_spec(&input, &source)?;
            let out = out.unwrap_or_else(|| sibling(&input, format!("{}.cps", stem(&input))));
            std::fs::write(&out, text).with_context(|| format!("cannot write {}", out.display()))?;
            println!("wrote {}", out.display());
        }
        Cmd::Corrupt { reference, kinds, rate, block, seed, uart_target, columns, random_subset, corrupt_uart, out } => {
            let records = Records::from_table(&read_csv(&reference, &[])?);
            let jobs: Vec<CorruptionJob> = kinds
                .iter()
                .map(|&kind| CorruptionJob {
                    block_size: block,
                    rate,
                    uart_target: uart_target.clone(),
                    columns: columns.clone(),
                    random_subset,
                    corrupt_uart,
                    ..CorruptionJob::new(kind, seed)
                })
                .collect();
            let corrupted = compose(&records, &jobs)?;
            let label = kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join("+");
            let out = out.unwrap_or_else(|| sibling(&reference, format!("{}.{label}.csv", stem(&reference))));
            std::fs::write(&out, corrupted.to_csv_string()).with_context(|| format!("cannot write {}", out.display()))?;
            println!("wrote {}", out.display());
        }
        Cmd::Fixture { rows, seed, out } => {
            let table = generate_reference(rows, seed)?;
            write_csv(&table, &out)?;
            println!("wrote {}", out.display());
        }
        Cmd::Run { .. } | Cmd::Gen { .. } => unreachable!("handled in main"),
    }
    Ok(())
}
