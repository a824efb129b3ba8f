//! Direct execution of a program, recording every atomic step.
//!
//! Each run gets its own folder under `<output_dir>/runs/`, named by its
//! start time. After every step the current table is written there as
//! `NNN_<slug>.csv` and a line is appended to `run.log`:
//!
//! ```text
//! 2026-10-16T09:30:00.000Z | run start | spec out_of_bounds.cps | input raw.csv
//! 2026-10-16T09:30:00.004Z | step 001 | import 'raw.csv' (skip empty)
//! 2026-10-16T09:30:00.009Z | step 002 | enforce real type on 'Voltage'
//! 2026-10-16T09:30:00.011Z | run end | 2 steps | outputs: out.csv
//! ```
//!
//! Final outputs go to the output directory itself.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::ast::{validate_spec, Command, Diagnostic, FilterScope, ImportCmd, RowFilter, Spec};
use crate::config::RunConfig;
use crate::inspector;
use crate::table::{apply_substring_filters, read_csv, write_csv, Table, TableError};
use crate::transforms::{run_export_observed, ExportStep, TransformError};

pub const LOG_NAME: &str = "run.log";

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based, strictly increasing.
    pub index: usize,
    pub description: String,
    pub timestamp: DateTime<Utc>,
    pub intermediate_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub run_dir: PathBuf,
    pub log_path: PathBuf,
    pub steps: Vec<StepRecord>,
    /// Files written to the output directory, in order.
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Error)]
pub enum InterpretError {
    #[error("program is not valid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("cannot prepare run folder {}: {source}", path.display())]
    Setup { path: PathBuf, source: std::io::Error },
    #[error("step {step} failed: {source} (intermediates kept in {})", run_dir.display())]
    Step { step: usize, run_dir: PathBuf, source: StepError },
}

fn now_stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Lower-case alphanumerics joined by single dashes, at most 48 bytes.
pub fn slug(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
        if out.len() >= 48 {
            break;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("step");
    }
    out
}

struct Run {
    run_dir: PathBuf,
    output_dir: PathBuf,
    log: File,
    log_path: PathBuf,
    steps: Vec<StepRecord>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn start(config: &RunConfig, spec_label: &str, input: &str) -> Result<Run, InterpretError> {
        let setup = |path: &Path| {
            let path = path.to_path_buf();
            move |source| InterpretError::Setup { path, source }
        };
        let started = Utc::now();
        let runs = config.output_dir.join("runs");
        fs::create_dir_all(&runs).map_err(setup(&runs))?;
        let base = started.format("%Y%m%dT%H%M%S%.3fZ").to_string();
        let mut run_dir = runs.join(&base);
        let mut n = 1;
        while run_dir.exists() {
            run_dir = runs.join(format!("{base}-{n}"));
            n += 1;
        }
        fs::create_dir_all(&run_dir).map_err(setup(&run_dir))?;
        let log_path = run_dir.join(LOG_NAME);
        let mut log = File::create(&log_path).map_err(setup(&log_path))?;
        writeln!(log, "{} | run start | spec {spec_label} | input {input}", now_stamp(started))
            .map_err(setup(&log_path))?;
        Ok(Run { run_dir, output_dir: config.output_dir.clone(), log, log_path, steps: vec![], outputs: vec![] })
    }

    fn next_index(&self) -> usize {
        self.steps.len() + 1
    }

    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StepError + '_ {
        move |source| StepError::Io { path: path.to_path_buf(), source }
    }

    fn record(&mut self, description: String, table: &Table) -> Result<(), StepError> {
        let index = self.next_index();
        let intermediate_path = self.run_dir.join(format!("{index:03}_{}.csv", slug(&description)));
        write_csv(table, &intermediate_path)?;
        let timestamp = Utc::now();
        writeln!(self.log, "{} | step {index:03} | {description}", now_stamp(timestamp))
            .map_err(Self::io(&self.log_path))?;
        self.steps.push(StepRecord { index, description, timestamp, intermediate_path });
        Ok(())
    }

    fn write_output(&mut self, relative: &str, contents: Output<'_>) -> Result<(), StepError> {
        let path = self.output_dir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(Self::io(parent))?;
        }
        match contents {
            Output::Table(t) => write_csv(t, &path)?,
            Output::Text(s) => fs::write(&path, s).map_err(Self::io(&path))?,
        }
        self.outputs.push(path);
        Ok(())
    }

    fn finish(mut self) -> RunReport {
        let outputs: Vec<String> = self.outputs.iter().map(|p| p.display().to_string()).collect();
        let _ = writeln!(
            self.log,
            "{} | run end | {} steps | outputs: {}",
            now_stamp(Utc::now()),
            self.steps.len(),
            outputs.join(", ")
        );
        RunReport { run_dir: self.run_dir, log_path: self.log_path, steps: self.steps, outputs: self.outputs }
    }

    fn fail(mut self, source: StepError) -> InterpretError {
        let step = self.next_index();
        let _ = writeln!(self.log, "{} | run failed | step {step:03} | {source}", now_stamp(Utc::now()));
        InterpretError::Step { step, run_dir: self.run_dir, source }
    }
}

enum Output<'a> {
    Table(&'a Table),
    Text(&'a str),
}

/// Human-readable summary of an import's row filters.
fn describe_import(import: &ImportCmd) -> String {
    let filters: Vec<&str> = import
        .row_filters
        .iter()
        .map(|f| match f {
            RowFilter::SkipEmpty => "skip empty",
            RowFilter::SkipMalformed => "skip malformed",
        })
        .collect();
    if filters.is_empty() {
        format!("import '{}'", import.source)
    } else {
        format!("import '{}' ({})", import.source, filters.join(", "))
    }
}

/// Runs `spec` against the files named in `config`.
///
/// `spec_label` names the program in the log header.
pub fn interpret(spec: &Spec, config: &RunConfig, spec_label: &str) -> Result<RunReport, InterpretError> {
    let diagnostics = validate_spec(spec);
    if !diagnostics.is_empty() {
        return Err(InterpretError::Invalid(diagnostics));
    }
    let input = spec
        .commands
        .iter()
        .find_map(|c| match &c.node {
            Command::Inspect(i) => Some(i.source.as_str()),
            Command::Import(i) => Some(i.source.as_str()),
            Command::Export(_) => None,
        })
        .unwrap_or("-");
    let mut run = Run::start(config, spec_label, input)?;
    match execute(spec, config, &mut run) {
        Ok(()) => Ok(run.finish()),
        Err(e) => Err(run.fail(e)),
    }
}

fn execute(spec: &Spec, config: &RunConfig, run: &mut Run) -> Result<(), StepError> {
    let mut imported: Option<Table> = None;
    for cmd in &spec.commands {
        match &cmd.node {
            Command::Inspect(inspect) => {
                let table = read_csv(&config.resolve_input(&inspect.source), &[])?;
                run.record(format!("inspect '{}'", inspect.source), &table)?;
                let text = crate::parser::pretty_print(&inspector::baseline_spec(&inspect.source, &table));
                run.write_output(&baseline_file_name(&inspect.source), Output::Text(&text))?;
            }
            Command::Import(import) => {
                let mut table = read_csv(&config.resolve_input(&import.source), &import.row_filters)?;
                run.record(describe_import(import), &table)?;
                for filter in &import.substring_filters {
                    table = apply_substring_filters(&table, std::slice::from_ref(filter))?;
                    let scope = match &filter.scope {
                        FilterScope::AllColumns => "all columns".to_string(),
                        FilterScope::Column(c) => format!("'{c}'"),
                    };
                    run.record(format!("remove '{}' from {scope}", filter.needle), &table)?;
                }
                imported = Some(table);
            }
            Command::Export(export) => {
                let table = imported.as_ref().expect("validated: export follows import");
                run_export_observed(table, export, |step: ExportStep<'_>| -> Result<(), StepError> {
                    if let Some(path) = step.output {
                        run.write_output(path, Output::Table(step.table))?;
                    }
                    run.record(step.description, step.table)
                })?;
            }
        }
    }
    Ok(())
}

/// `<stem>.cps` for an inspected CSV.
pub fn baseline_file_name(source: &str) -> String {
    let stem = Path::new(source).file_stem().and_then(|s| s.to_str()).unwrap_or("baseline");
    format!("{stem}.cps")
}

/// Step count an interpreter run of `spec` performs, derived from the
/// program alone. Cut exports write one step per segment, which depends on
/// the data; they are counted here as a single write.
pub fn expected_step_count(spec: &Spec) -> usize {
    spec.commands
        .iter()
        .map(|c| match &c.node {
            Command::Inspect(_) => 1,
            Command::Import(i) => 1 + i.substring_filters.len(),
            Command::Export(e) => crate::transforms::transform_step_count(e) + 1,
        })
        .sum()
}
