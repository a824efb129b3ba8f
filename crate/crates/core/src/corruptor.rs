//! Reproducible corruption of reference traces, for exercising the
//! sanitisation pipeline.
//!
//! A job picks non-overlapping, block-aligned groups of rows and applies one
//! corruption pattern to each. Jobs work on raw text [`Records`] rather than
//! typed tables because some corruptions (merged lines) produce records a
//! table cannot hold.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::inspector::infer_column_type;
use crate::table::{format_real, parse_int, parse_real, write_records, Column, Table};

/// The constant written by out-of-bounds corruption.
pub const OUT_OF_BOUNDS_VALUE: &str = "99999.999";

/// Characters injected by type-mismatch corruption. No member can appear in
/// a numeric literal, so every injected field fails to parse.
pub const INJECTION_ALPHABET: &[u8] = b"abcdfghijklmnopqrstuvwxyzABCDFGHIJKLMNOPQRSTUVWXYZ#!?*";

const SYMBOLS: &[u8] = b"#!?*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorruptionKind {
    TypeMismatch,
    TypeMismatchTargetedUart,
    OutOfBounds,
    OutOfOrderKeepTimestamps,
    OutOfOrderNewTimestamps,
    MissingFields,
    MissingRows,
    MisplacedEol,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 8] = [
        CorruptionKind::TypeMismatch,
        CorruptionKind::TypeMismatchTargetedUart,
        CorruptionKind::OutOfBounds,
        CorruptionKind::OutOfOrderKeepTimestamps,
        CorruptionKind::OutOfOrderNewTimestamps,
        CorruptionKind::MissingFields,
        CorruptionKind::MissingRows,
        CorruptionKind::MisplacedEol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::TypeMismatch => "type-mismatch",
            CorruptionKind::TypeMismatchTargetedUart => "type-mismatch-targeted-uart",
            CorruptionKind::OutOfBounds => "out-of-bounds",
            CorruptionKind::OutOfOrderKeepTimestamps => "out-of-order-keep-timestamps",
            CorruptionKind::OutOfOrderNewTimestamps => "out-of-order-new-timestamps",
            CorruptionKind::MissingFields => "missing-fields",
            CorruptionKind::MissingRows => "missing-rows",
            CorruptionKind::MisplacedEol => "misplaced-eol",
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionKind {
    type Err = CorruptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CorruptionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CorruptionError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CorruptionError {
    #[error("unknown corruption kind '{0}' (expected one of: {list})", list = kind_list())]
    UnknownKind(String),
    #[error("corruption rate must lie in (0, 1], got {0}")]
    BadRate(f64),
    #[error("block size must be at least 1")]
    BadBlockSize,
    #[error("{0} needs a UART target")]
    MissingTarget(CorruptionKind),
    #[error("table has {rows} rows, fewer than one block of {block}")]
    TooFewRows { rows: usize, block: usize },
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("no numeric columns to corrupt")]
    NoNumericColumns,
    #[error("no jobs to apply")]
    NoJobs,
}

fn kind_list() -> String {
    CorruptionKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionJob {
    pub kind: CorruptionKind,
    pub block_size: usize,
    /// Fraction of rows to corrupt.
    pub rate: f64,
    pub seed: u64,
    /// Bias block selection towards rows carrying this UART message.
    pub uart_target: Option<String>,
    /// Columns eligible for value corruption; defaults to every numeric
    /// column except the timestamp.
    pub columns: Option<Vec<String>>,
    /// Out-of-bounds only: hit a random subset of the columns per block.
    pub random_subset: bool,
    /// Type mismatch only: also inject symbols into UART messages.
    pub corrupt_uart: bool,
    pub timestamp_column: String,
    pub uart_column: String,
}

impl CorruptionJob {
    pub fn new(kind: CorruptionKind, seed: u64) -> Self {
        CorruptionJob {
            kind,
            block_size: 10,
            rate: 0.005,
            seed,
            uart_target: None,
            columns: None,
            random_subset: false,
            corrupt_uart: false,
            timestamp_column: "Timestamp".into(),
            uart_column: "UART".into(),
        }
    }

    pub fn validate(&self) -> Result<(), CorruptionError> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(CorruptionError::BadRate(self.rate));
        }
        if self.block_size == 0 {
            return Err(CorruptionError::BadBlockSize);
        }
        if self.kind == CorruptionKind::TypeMismatchTargetedUart && self.uart_target.is_none() {
            return Err(CorruptionError::MissingTarget(self.kind));
        }
        Ok(())
    }

    /// Blocks to corrupt: `round(rate * rows / block_size)`, at least one and
    /// at most the number of whole blocks available.
    pub fn block_count(&self, row_count: usize) -> usize {
        let wanted = (self.rate * row_count as f64 / self.block_size as f64).round() as usize;
        wanted.max(1).min(row_count / self.block_size)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// A header plus raw text records, which may be ragged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Records {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Records {
    pub fn from_table(table: &Table) -> Self {
        Records { header: table.names().map(str::to_string).collect(), rows: table.rendered_rows() }
    }

    pub fn to_csv_string(&self) -> String {
        write_records(&self.header, &self.rows)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize, CorruptionError> {
        self.column_index(name).ok_or_else(|| CorruptionError::UnknownColumn(name.to_string()))
    }

    fn field(&self, row: usize, col: usize) -> &str {
        self.rows[row].get(col).map_or("", String::as_str)
    }

    fn column_text(&self, col: usize) -> Column {
        let cells: Vec<&str> = (0..self.rows.len()).map(|r| self.field(r, col)).collect();
        Column::from_text(self.header[col].clone(), &cells)
    }
}

/// Start rows of the blocks a job corrupts, ascending.
pub fn select_blocks(records: &Records, job: &CorruptionJob) -> Result<Vec<usize>, CorruptionError> {
    job.validate()?;
    select_blocks_with(records, job, &mut job.rng(0))
}

fn select_blocks_with(records: &Records, job: &CorruptionJob, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, CorruptionError> {
    let rows = records.rows.len();
    if rows < job.block_size {
        return Err(CorruptionError::TooFewRows { rows, block: job.block_size });
    }
    let slots = rows / job.block_size;
    let count = job.block_count(rows);

    let mut preferred: Vec<usize> = Vec::new();
    if let Some(target) = &job.uart_target {
        if let Some(col) = records.column_index(&job.uart_column) {
            preferred = (0..slots)
                .filter(|s| (s * job.block_size..(s + 1) * job.block_size).any(|r| records.field(r, col) == target))
                .collect();
        }
    }
    preferred.shuffle(rng);
    preferred.truncate(count);

    let mut rest: Vec<usize> = (0..slots).filter(|s| !preferred.contains(s)).collect();
    rest.shuffle(rng);
    let mut chosen = preferred;
    chosen.extend(rest.into_iter().take(count - chosen.len()));
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|s| s * job.block_size).collect())
}

pub fn corrupt(records: &Records, job: &CorruptionJob) -> Result<Records, CorruptionError> {
    apply_job(records, job, 0)
}

/// Applies jobs in order, job `i` drawing from random stream `i` of its seed.
pub fn compose(records: &Records, jobs: &[CorruptionJob]) -> Result<Records, CorruptionError> {
    if jobs.is_empty() {
        return Err(CorruptionError::NoJobs);
    }
    jobs.iter().enumerate().try_fold(records.clone(), |acc, (i, job)| apply_job(&acc, job, i as u64))
}

fn target_columns(records: &Records, job: &CorruptionJob) -> Result<Vec<usize>, CorruptionError> {
    let cols: Vec<usize> = match &job.columns {
        Some(names) => names.iter().map(|n| records.require(n)).collect::<Result<_, _>>()?,
        None => (0..records.header.len())
            .filter(|&c| records.header[c] != job.timestamp_column && records.header[c] != job.uart_column)
            .filter(|&c| infer_column_type(&records.column_text(c)).is_numeric())
            .collect(),
    };
    if cols.is_empty() {
        return Err(CorruptionError::NoNumericColumns);
    }
    Ok(cols)
}

fn set_field(row: &mut Vec<String>, col: usize, value: String) {
    if row.len() <= col {
        row.resize(col + 1, String::new());
    }
    row[col] = value;
}

fn inject(text: &str, alphabet: &[u8], rng: &mut ChaCha8Rng) -> String {
    let c = alphabet[rng.gen_range(0..alphabet.len())] as char;
    let boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len())).collect();
    let at = boundaries[rng.gen_range(0..boundaries.len())];
    let mut out = String::with_capacity(text.len() + 1);
    out.push_str(&text[..at]);
    out.push(c);
    out.push_str(&text[at..]);
    out
}

/// Sattolo's algorithm: a uniformly random cyclic permutation, so every
/// row leaves its position.
fn cyclic_permutation(len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = rng.gen_range(0..i);
        perm.swap(i, j);
    }
    perm
}

fn apply_job(records: &Records, job: &CorruptionJob, stream: u64) -> Result<Records, CorruptionError> {
    job.validate()?;
    if records.rows.is_empty() {
        return Err(CorruptionError::TooFewRows { rows: 0, block: job.block_size });
    }
    let mut rng = job.rng(stream);
    let blocks = select_blocks_with(records, job, &mut rng)?;
    let bs = job.block_size;
    let mut out = records.clone();

    match job.kind {
        CorruptionKind::TypeMismatch | CorruptionKind::TypeMismatchTargetedUart => {
            let cols = target_columns(records, job)?;
            let uart = if job.corrupt_uart { records.column_index(&job.uart_column) } else { None };
            for &start in &blocks {
                for row in &mut out.rows[start..start + bs] {
                    for &c in &cols {
                        let current = row.get(c).cloned().unwrap_or_default();
                        set_field(row, c, inject(&current, INJECTION_ALPHABET, &mut rng));
                    }
                    if let Some(u) = uart {
                        let current = row.get(u).cloned().unwrap_or_default();
                        if !current.trim().is_empty() {
                            set_field(row, u, inject(&current, SYMBOLS, &mut rng));
                        }
                    }
                }
            }
        }
        CorruptionKind::OutOfBounds => {
            let cols = target_columns(records, job)?;
            for &start in &blocks {
                let hit: Vec<usize> = if job.random_subset {
                    let k = rng.gen_range(1..=cols.len());
                    cols.choose_multiple(&mut rng, k).copied().collect()
                } else {
                    cols.clone()
                };
                for row in &mut out.rows[start..start + bs] {
                    for &c in &hit {
                        set_field(row, c, OUT_OF_BOUNDS_VALUE.to_string());
                    }
                }
            }
        }
        CorruptionKind::OutOfOrderKeepTimestamps => {
            for &start in &blocks {
                let perm = cyclic_permutation(bs, &mut rng);
                let original = records.rows[start..start + bs].to_vec();
                for (i, &p) in perm.iter().enumerate() {
                    out.rows[start + i] = original[p].clone();
                }
            }
        }
        CorruptionKind::OutOfOrderNewTimestamps => {
            let ts = records.require(&job.timestamp_column)?;
            for &start in &blocks {
                let perm = cyclic_permutation(bs, &mut rng);
                let original = records.rows[start..start + bs].to_vec();
                let fresh = fresh_timestamps(records, ts, start, bs);
                for (i, &p) in perm.iter().enumerate() {
                    let mut row = original[p].clone();
                    set_field(&mut row, ts, fresh[i].clone());
                    out.rows[start + i] = row;
                }
            }
        }
        CorruptionKind::MissingFields => {
            let cols = target_columns(records, job)?;
            for &start in &blocks {
                let c = cols[rng.gen_range(0..cols.len())];
                for row in &mut out.rows[start..start + bs] {
                    set_field(row, c, String::new());
                }
            }
        }
        CorruptionKind::MissingRows => {
            out.rows = records
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| !blocks.iter().any(|&s| (s..s + bs).contains(i)))
                .map(|(_, r)| r.clone())
                .collect();
        }
        CorruptionKind::MisplacedEol => {
            let mut rows = Vec::with_capacity(records.rows.len());
            let mut i = 0;
            while i < records.rows.len() {
                let in_block = blocks.iter().find(|&&s| (s..s + bs).contains(&i));
                match in_block {
                    Some(&s) if i + 1 < s + bs => {
                        rows.push(merge_lines(&records.rows[i], &records.rows[i + 1]));
                        i += 2;
                    }
                    _ => {
                        rows.push(records.rows[i].clone());
                        i += 1;
                    }
                }
            }
            out.rows = rows;
        }
    }
    Ok(out)
}

/// Two records written without the line break between them.
fn merge_lines(first: &[String], second: &[String]) -> Vec<String> {
    let mut merged: Vec<String> = first.to_vec();
    let joint = merged.pop().unwrap_or_default() + second.first().map_or("", String::as_str);
    merged.push(joint);
    merged.extend(second.iter().skip(1).cloned());
    merged
}

/// Monotonic replacement timestamps for a block: they start at the block's
/// first original timestamp and step by the median interval seen before it.
fn fresh_timestamps(records: &Records, ts: usize, start: usize, len: usize) -> Vec<String> {
    let parsed: Vec<Option<f64>> = records.rows.iter().map(|r| parse_real(r.get(ts).map_or("", String::as_str))).collect();
    let integral = records.rows.iter().all(|r| parse_int(r.get(ts).map_or("", String::as_str)).is_some());
    let deltas = |range: std::ops::Range<usize>| -> Vec<f64> {
        parsed[range]
            .windows(2)
            .filter_map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) if b > a => Some(b - a),
                _ => None,
            })
            .collect()
    };
    let mut intervals = deltas(0..start.min(parsed.len()));
    if intervals.is_empty() {
        intervals = deltas(0..parsed.len());
    }
    let step = crate::numeric::median(&intervals.into_iter().map(Some).collect::<Vec<_>>()).unwrap_or(1.0);
    let first = parsed[start].unwrap_or(0.0);
    (0..len)
        .map(|k| {
            let value = first + step * k as f64;
            if integral {
                format!("{}", value.round() as i64)
            } else {
                format_real(value)
            }
        })
        .collect()
}
