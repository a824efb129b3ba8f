//! Value-level comparison of CSV files.
//!
//! Two files are equivalent when their headers and row counts match and
//! every cell pair is equal: blank cells only equal blank cells, cells that
//! both parse as numbers are compared within an absolute tolerance, and
//! anything else must match exactly.

use std::fmt;
use std::path::Path;

use crate::table::{parse_csv, parse_real, read_csv, CellValue, Table, TableError};

#[derive(Debug, Clone, PartialEq)]
pub struct CellDifference {
    pub row: usize,
    pub column: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffReport {
    pub header: Option<(Vec<String>, Vec<String>)>,
    pub row_counts: (usize, usize),
    pub cells: Vec<CellDifference>,
}

impl DiffReport {
    pub fn is_equal(&self) -> bool {
        self.header.is_none() && self.row_counts.0 == self.row_counts.1 && self.cells.is_empty()
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equal() {
            return f.write_str("equivalent");
        }
        if let Some((l, r)) = &self.header {
            writeln!(f, "headers differ: {l:?} vs {r:?}")?;
        }
        if self.row_counts.0 != self.row_counts.1 {
            writeln!(f, "row counts differ: {} vs {}", self.row_counts.0, self.row_counts.1)?;
        }
        for d in self.cells.iter().take(20) {
            writeln!(f, "row {} column '{}': {:?} vs {:?}", d.row, d.column, d.left, d.right)?;
        }
        if self.cells.len() > 20 {
            writeln!(f, "... {} more cell differences", self.cells.len() - 20)?;
        }
        Ok(())
    }
}

pub fn cells_equivalent(left: &CellValue, right: &CellValue, tolerance: f64) -> bool {
    match (left, right) {
        (CellValue::Empty, CellValue::Empty) => true,
        (CellValue::Empty, _) | (_, CellValue::Empty) => false,
        _ => {
            let (l, r) = (left.render(), right.render());
            match (parse_real(&l), parse_real(&r)) {
                (Some(a), Some(b)) => (a - b).abs() <= tolerance,
                _ => l == r,
            }
        }
    }
}

pub fn diff_tables(left: &Table, right: &Table, tolerance: f64) -> DiffReport {
    let lh: Vec<String> = left.names().map(str::to_string).collect();
    let rh: Vec<String> = right.names().map(str::to_string).collect();
    let mut report = DiffReport { row_counts: (left.row_count(), right.row_count()), ..Default::default() };
    if lh != rh {
        report.header = Some((lh, rh));
        return report;
    }
    for row in 0..left.row_count().min(right.row_count()) {
        for (j, name) in lh.iter().enumerate() {
            let (l, r) = (left.cell(row, j), right.cell(row, j));
            if !cells_equivalent(l, r, tolerance) {
                report.cells.push(CellDifference {
                    row,
                    column: name.clone(),
                    left: l.render(),
                    right: r.render(),
                });
            }
        }
    }
    report
}

pub fn diff_csv_text(left: &str, right: &str, tolerance: f64) -> Result<DiffReport, TableError> {
    Ok(diff_tables(&parse_csv(left, &[])?, &parse_csv(right, &[])?, tolerance))
}

pub fn diff_csv(left: &Path, right: &Path, tolerance: f64) -> Result<DiffReport, TableError> {
    Ok(diff_tables(&read_csv(left, &[])?, &read_csv(right, &[])?, tolerance))
}
