//! Columnar in-memory tables over typed-or-empty cells, and the CSV dialect
//! they are read from and written to.
//!
//! Dialect: comma separated, optional double-quote quoting with `""` as the
//! escaped quote, `\n`, `\r\n` or `\r` line endings on read and `\n` on
//! write. The first record is a mandatory header. A field that is blank
//! after trimming is read as [`CellValue::Empty`].

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::{FilterScope, RowFilter, SubstringFilter};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("missing header row")]
    MissingHeader,
    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),
    #[error("header field {0} is blank")]
    BlankColumnName(usize),
    #[error("line {line}: expected {expected} fields, found {found}")]
    MalformedRow { line: usize, expected: usize, found: usize },
    #[error("line {0}: unterminated quoted field")]
    UnterminatedQuote(usize),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("column '{name}' has {found} cells, expected {expected}")]
    RaggedColumn { name: String, expected: usize, found: usize },
}

impl TableError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        TableError::Io { path: path.to_path_buf(), source }
    }
}

/// A single cell. `Real` values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Int(i64),
    Real(f64),
    Str(String),
    Empty,
}

impl CellValue {
    /// Builds a cell from raw CSV text, normalising blanks to `Empty`.
    pub fn from_text(text: &str) -> Self {
        if text.trim().is_empty() {
            CellValue::Empty
        } else {
            CellValue::Str(text.to_string())
        }
    }

    /// A real cell, or `Empty` if the value is not finite.
    pub fn real(value: f64) -> Self {
        if value.is_finite() {
            CellValue::Real(value)
        } else {
            CellValue::Empty
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            CellValue::Int(i) => Some(i as f64),
            CellValue::Real(r) => Some(r),
            _ => None,
        }
    }

    /// Canonical text form, as written to CSV.
    pub fn render(&self) -> String {
        match self {
            CellValue::Int(i) => i.to_string(),
            CellValue::Real(r) => format_real(*r),
            CellValue::Str(s) => s.clone(),
            CellValue::Empty => String::new(),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Shortest round-trip decimal with at least one fractional digit.
pub fn format_real(value: f64) -> String {
    let mut s = value.to_string();
    if value.is_finite() && !s.contains('.') {
        s.push_str(".0");
    }
    s
}

/// Optional sign followed by ASCII digits, surrounding whitespace ignored.
pub fn parse_int(text: &str) -> Option<i64> {
    let t = text.trim();
    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

/// Decimal or scientific notation, finite values only.
///
/// Accepts `[+-]? (digits ('.' digits*)? | '.' digits) ([eE] [+-]? digits)?`.
pub fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    if !is_real_literal(t) {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_real_literal(t: &str) -> bool {
    let b = t.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i > int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits |= i > frac_start;
    }
    if !digits {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub cells: Vec<CellValue>,
}

impl Column {
    pub fn new(name: impl Into<String>, cells: Vec<CellValue>) -> Self {
        Column { name: name.into(), cells }
    }

    /// A column of raw text cells, blanks normalised to `Empty`.
    pub fn from_text<S: AsRef<str>>(name: impl Into<String>, cells: &[S]) -> Self {
        Column::new(name, cells.iter().map(|s| CellValue::from_text(s.as_ref())).collect())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// An ordered set of equally long, uniquely named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<Column>,
    row_count: usize,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Result<Self, TableError> {
        let row_count = columns.first().map_or(0, Column::len);
        for (i, col) in columns.iter().enumerate() {
            if col.name.is_empty() {
                return Err(TableError::BlankColumnName(i + 1));
            }
            if columns[..i].iter().any(|c| c.name == col.name) {
                return Err(TableError::DuplicateColumn(col.name.clone()));
            }
            if col.len() != row_count {
                return Err(TableError::RaggedColumn {
                    name: col.name.clone(),
                    expected: row_count,
                    found: col.len(),
                });
            }
        }
        Ok(Table { columns, row_count })
    }

    /// Builds a table from rows of raw text.
    pub fn from_text_rows<S: AsRef<str>>(header: &[S], rows: &[Vec<S>]) -> Result<Self, TableError> {
        let columns = header
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let cells = rows
                    .iter()
                    .map(|r| r.get(j).map_or(CellValue::Empty, |s| CellValue::from_text(s.as_ref())))
                    .collect();
                Column::new(name.as_ref(), cells)
            })
            .collect();
        Table::new(columns)
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn require_column(&self, name: &str) -> Result<&Column, TableError> {
        self.column(name).ok_or_else(|| TableError::UnknownColumn(name.to_string()))
    }

    pub fn cell(&self, row: usize, column: usize) -> &CellValue {
        &self.columns[column].cells[row]
    }

    pub fn row(&self, row: usize) -> Vec<&CellValue> {
        self.columns.iter().map(|c| &c.cells[row]).collect()
    }

    /// A copy with the column at `index` replaced.
    pub fn with_column(&self, index: usize, column: Column) -> Result<Table, TableError> {
        let mut columns = self.columns.clone();
        columns[index] = column;
        Table::new(columns)
    }

    /// A copy holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Table {
        let columns = self
            .columns
            .iter()
            .map(|c| Column::new(c.name.clone(), indices.iter().map(|&i| c.cells[i].clone()).collect()))
            .collect();
        Table { columns, row_count: indices.len() }
    }

    pub fn slice_rows(&self, start: usize, end: usize) -> Table {
        let indices: Vec<usize> = (start..end).collect();
        self.select_rows(&indices)
    }

    /// Rows in canonical text form.
    pub fn rendered_rows(&self) -> Vec<Vec<String>> {
        (0..self.row_count)
            .map(|r| self.columns.iter().map(|c| c.cells[r].render()).collect())
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let header: Vec<String> = self.names().map(str::to_string).collect();
        write_records(&header, &self.rendered_rows())
    }
}

/// One data record as read from a file, before typing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub fields: Vec<String>,
    pub line_number: usize,
}

impl RawRow {
    /// A line with no characters at all.
    pub fn is_blank_line(&self) -> bool {
        self.fields.is_empty()
    }
}

/// Splits CSV text into a header and raw data records.
pub fn parse_records(text: &str) -> Result<(Vec<String>, Vec<RawRow>), TableError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut records = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;

    while chars.peek().is_some() {
        let start_line = line;
        let mut fields = Vec::new();
        let mut field = String::new();
        let mut in_quotes = false;
        let mut line_has_content = false;
        loop {
            let Some(c) = chars.next() else {
                if in_quotes {
                    return Err(TableError::UnterminatedQuote(start_line));
                }
                break;
            };
            if in_quotes {
                match c {
                    '"' if chars.peek() == Some(&'"') => {
                        chars.next();
                        field.push('"');
                    }
                    '"' => in_quotes = false,
                    '\n' => {
                        line += 1;
                        field.push(c);
                    }
                    _ => field.push(c),
                }
                continue;
            }
            match c {
                '\n' | '\r' => {
                    if c == '\r' && chars.peek() == Some(&'\n') {
                        chars.next();
                    }
                    line += 1;
                    break;
                }
                ',' => {
                    line_has_content = true;
                    fields.push(std::mem::take(&mut field));
                }
                '"' if field.is_empty() => {
                    line_has_content = true;
                    in_quotes = true;
                }
                _ => {
                    line_has_content = true;
                    field.push(c);
                }
            }
        }
        if line_has_content {
            fields.push(field);
        }
        records.push(RawRow { fields, line_number: start_line });
    }

    let mut records = records.into_iter();
    let header = match records.next() {
        Some(h) if !h.is_blank_line() => h.fields,
        _ => return Err(TableError::MissingHeader),
    };
    Ok((header, records.collect()))
}

/// Parses CSV text into a table of `Str`/`Empty` cells, dropping rows as
/// the row filters demand.
pub fn parse_csv(text: &str, row_filters: &[RowFilter]) -> Result<Table, TableError> {
    let (header, records) = parse_records(text)?;
    let width = header.len();
    let skip_empty = row_filters.contains(&RowFilter::SkipEmpty);
    let skip_malformed = row_filters.contains(&RowFilter::SkipMalformed);

    let mut columns: Vec<Vec<CellValue>> = vec![Vec::new(); width];
    for record in records {
        let found = record.fields.len();
        if !record.is_blank_line() && found != width {
            if skip_malformed {
                continue;
            }
            if found > width {
                return Err(TableError::MalformedRow { line: record.line_number, expected: width, found });
            }
        }
        let cells: Vec<CellValue> = (0..width)
            .map(|j| record.fields.get(j).map_or(CellValue::Empty, |f| CellValue::from_text(f)))
            .collect();
        if skip_empty && cells.iter().all(CellValue::is_empty) {
            continue;
        }
        for (col, cell) in columns.iter_mut().zip(cells) {
            col.push(cell);
        }
    }

    Table::new(header.into_iter().zip(columns).map(|(name, cells)| Column::new(name, cells)).collect())
}

pub fn read_csv(path: &Path, row_filters: &[RowFilter]) -> Result<Table, TableError> {
    let text = std::fs::read_to_string(path).map_err(|e| TableError::io(path, e))?;
    parse_csv(&text, row_filters)
}

pub fn write_csv(table: &Table, path: &Path) -> Result<(), TableError> {
    std::fs::write(path, table.to_csv_string()).map_err(|e| TableError::io(path, e))
}

fn push_field(out: &mut String, field: &str) {
    if field.contains([',', '"', '\n', '\r']) {
        out.push('"');
        out.push_str(&field.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(field);
    }
}

fn push_record<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    if let [only] = fields {
        if only.as_ref().is_empty() {
            // a bare empty line would read back as a blank line
            out.push_str("\"\"\n");
            return;
        }
    }
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_field(out, f.as_ref());
    }
    out.push('\n');
}

/// Serialises a header and records, which need not all have the header's
/// width.
pub fn write_records<S: AsRef<str>, T: AsRef<str>>(header: &[S], rows: &[Vec<T>]) -> String {
    let mut out = String::new();
    push_record(&mut out, header);
    for row in rows {
        push_record(&mut out, row);
    }
    out
}

/// Removes every occurrence of each needle from in-scope text cells, until
/// none remains. Cells left blank become `Empty`.
pub fn apply_substring_filters(table: &Table, filters: &[SubstringFilter]) -> Result<Table, TableError> {
    let mut columns = table.columns.clone();
    for filter in filters {
        let in_scope: Vec<usize> = match &filter.scope {
            FilterScope::AllColumns => (0..columns.len()).collect(),
            FilterScope::Column(name) => vec![table
                .column_index(name)
                .ok_or_else(|| TableError::UnknownColumn(name.clone()))?],
        };
        if filter.needle.is_empty() {
            continue;
        }
        for j in in_scope {
            for cell in &mut columns[j].cells {
                if let CellValue::Str(s) = cell {
                    if s.contains(filter.needle.as_str()) {
                        *cell = CellValue::from_text(&remove_all(s, &filter.needle));
                    }
                }
            }
        }
    }
    Table::new(columns)
}

fn remove_all(text: &str, needle: &str) -> String {
    let mut current = text.replace(needle, "");
    while current.contains(needle) {
        current = current.replace(needle, "");
    }
    current
}
