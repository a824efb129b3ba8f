#![allow(dead_code)]

pub mod specgen;

use std::path::{Path, PathBuf};
use std::process::Command;

use cpslint::corruptor::{corrupt, CorruptionJob, CorruptionKind, Records};
use cpslint::fixtures::{generate_reference, IMAGE_LOADER};
use cpslint::table::write_csv;
use cpslint::Table;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

pub fn corpus() -> Vec<PathBuf> {
    let mut specs: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cps"))
        .collect();
    specs.sort();
    specs
}

pub fn reference(rows: usize) -> Table {
    generate_reference(rows, 42).unwrap()
}

/// The job used for every corrupted variant: default budget, seed 7.
pub fn job(kind: CorruptionKind) -> CorruptionJob {
    let mut job = CorruptionJob::new(kind, 7);
    if kind == CorruptionKind::TypeMismatchTargetedUart {
        job.uart_target = Some(IMAGE_LOADER.to_string());
    }
    job
}

pub fn corrupted_text(table: &Table, kind: CorruptionKind) -> String {
    corrupt(&Records::from_table(table), &job(kind)).unwrap().to_csv_string()
}

/// Writes `trace.csv` into a fresh input directory.
pub fn write_trace(dir: &Path, table: Option<&Table>, text: Option<&str>) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join("trace.csv");
    match (table, text) {
        (Some(t), _) => write_csv(t, &path).unwrap(),
        (None, Some(s)) => std::fs::write(&path, s).unwrap(),
        _ => unreachable!(),
    }
    path
}

/// A Python with pandas and numpy, if this machine has one.
pub fn python() -> Option<String> {
    let cmd = std::env::var("CPSLINT_PYTHON").unwrap_or_else(|_| "python3".into());
    let ok = Command::new(&cmd)
        .args(["-c", "import numpy, pandas"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    ok.then_some(cmd)
}

/// Output files of a run directory, sorted, ignoring scripts and run logs.
pub fn csv_outputs(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().path()).collect())
        .unwrap_or_default();
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "csv"));
    files.sort();
    files
}
