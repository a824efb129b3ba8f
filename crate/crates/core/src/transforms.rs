//! Executable semantics of `export`: type enforcement, range validation,
//! imputation, sorting and phase cutting.
//!
//! Per column the order is fixed: rename, enforce type, apply range, impute.
//! Sorting follows once every column is done, then the table is cut into
//! segments and each segment is bound to an output path.

use thiserror::Error;

use crate::ast::{ColumnPlan, ColumnType, CutRule, ExportCmd, ImputeStrategy, ValidRange};
use crate::numeric::{self, FitError};
use crate::table::{parse_int, parse_real, CellValue, Column, Table, TableError};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("column '{column}' holds non-numeric values; {operation} needs numbers")]
    NonNumeric { column: String, operation: String },
    #[error("cannot impute '{column}' by {strategy}: the column has no known values")]
    NoKnownValues { column: String, strategy: ImputeStrategy },
    #[error("cannot impute '{column}': {source}")]
    Fit { column: String, source: FitError },
    #[error("x axis '{0}' must be numeric and strictly increasing over the imputed rows")]
    BadAxis(String),
}

/// A contiguous run of rows `[start_row, end_row_exclusive)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSegment {
    pub start_row: usize,
    pub end_row_exclusive: usize,
    pub index: usize,
}

impl PhaseSegment {
    pub fn len(&self) -> usize {
        self.end_row_exclusive - self.start_row
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parses every cell into `ty`; cells that do not parse become `Empty`.
pub fn enforce_type(column: &Column, ty: ColumnType) -> Column {
    let cells = column
        .cells
        .iter()
        .map(|cell| match (ty, cell) {
            (_, CellValue::Empty) => CellValue::Empty,
            (ColumnType::Str, CellValue::Str(s)) => CellValue::Str(s.clone()),
            (ColumnType::Str, other) => CellValue::Str(other.render()),
            (ColumnType::Int, CellValue::Str(s)) => parse_int(s).map_or(CellValue::Empty, CellValue::Int),
            (ColumnType::Int, CellValue::Int(i)) => CellValue::Int(*i),
            (ColumnType::Int, CellValue::Real(r)) => real_to_int(*r),
            (ColumnType::Real, CellValue::Str(s)) => parse_real(s).map_or(CellValue::Empty, CellValue::Real),
            (ColumnType::Real, CellValue::Int(i)) => CellValue::Real(*i as f64),
            (ColumnType::Real, CellValue::Real(r)) => CellValue::real(*r),
        })
        .collect();
    Column::new(column.name.clone(), cells)
}

fn real_to_int(r: f64) -> CellValue {
    if r.fract() == 0.0 && r >= i64::MIN as f64 && r < i64::MAX as f64 {
        CellValue::Int(r as i64)
    } else {
        CellValue::Empty
    }
}

/// Empties numeric cells outside the inclusive range.
pub fn apply_range(column: &Column, range: ValidRange) -> Column {
    let cells = column
        .cells
        .iter()
        .map(|cell| match cell.as_f64() {
            Some(v) if !range.contains(v) => CellValue::Empty,
            _ => cell.clone(),
        })
        .collect();
    Column::new(column.name.clone(), cells)
}

/// Fills `Empty` cells; known cells are never altered.
///
/// Numeric strategies write reals, rounded half away from zero when every
/// known cell of the column is an integer. `x_axis` defaults to the row
/// index. A column without gaps is returned unchanged.
pub fn impute(column: &Column, strategy: ImputeStrategy, x_axis: Option<&Column>) -> Result<Column, TransformError> {
    if !column.cells.iter().any(CellValue::is_empty) {
        return Ok(column.clone());
    }
    let cells = match strategy {
        ImputeStrategy::ForwardFill => fill_cells(&column.cells, numeric::forward_fill),
        ImputeStrategy::BackFill => fill_cells(&column.cells, numeric::back_fill),
        _ => impute_numeric(column, strategy, x_axis)?,
    };
    Ok(Column::new(column.name.clone(), cells))
}

fn fill_cells(cells: &[CellValue], fill: fn(&[Option<CellValue>]) -> Vec<Option<CellValue>>) -> Vec<CellValue> {
    let series: Vec<Option<CellValue>> =
        cells.iter().map(|c| if c.is_empty() { None } else { Some(c.clone()) }).collect();
    fill(&series).into_iter().map(|c| c.unwrap_or(CellValue::Empty)).collect()
}

fn numeric_series(column: &Column, operation: &str) -> Result<Vec<Option<f64>>, TransformError> {
    column
        .cells
        .iter()
        .map(|cell| match cell {
            CellValue::Empty => Ok(None),
            CellValue::Str(_) => Err(TransformError::NonNumeric {
                column: column.name.clone(),
                operation: operation.to_string(),
            }),
            other => Ok(other.as_f64()),
        })
        .collect()
}

fn impute_numeric(
    column: &Column,
    strategy: ImputeStrategy,
    x_axis: Option<&Column>,
) -> Result<Vec<CellValue>, TransformError> {
    let operation = format!("{strategy} imputation");
    let values = numeric_series(column, &operation)?;
    let no_known = || TransformError::NoKnownValues { column: column.name.clone(), strategy };
    let filled: Vec<Option<f64>> = match strategy {
        ImputeStrategy::Mean => {
            let m = numeric::mean(&values).ok_or_else(no_known)?;
            values.iter().map(|v| v.or(Some(m))).collect()
        }
        ImputeStrategy::Median => {
            let m = numeric::median(&values).ok_or_else(no_known)?;
            values.iter().map(|v| v.or(Some(m))).collect()
        }
        ImputeStrategy::Linear => numeric::linear_fill(&axis(column, x_axis, &values)?, &values),
        ImputeStrategy::Polynomial(order) => {
            numeric::polynomial_fill(&axis(column, x_axis, &values)?, &values, order as usize)
                .map_err(|source| TransformError::Fit { column: column.name.clone(), source })?
        }
        ImputeStrategy::ForwardFill | ImputeStrategy::BackFill => unreachable!("handled by fill_cells"),
    };

    let integral = column.cells.iter().any(|c| matches!(c, CellValue::Int(_)))
        && !column.cells.iter().any(|c| matches!(c, CellValue::Real(_)));
    Ok(column
        .cells
        .iter()
        .zip(filled)
        .map(|(cell, v)| match (cell, v) {
            (CellValue::Empty, Some(v)) if integral => real_to_int(v.round()),
            (CellValue::Empty, Some(v)) => CellValue::real(v),
            (cell, _) => cell.clone(),
        })
        .collect())
}

fn axis(column: &Column, x_axis: Option<&Column>, values: &[Option<f64>]) -> Result<Vec<f64>, TransformError> {
    let Some(x) = x_axis else {
        return Ok(numeric::index_axis(values.len()));
    };
    let bad = || TransformError::BadAxis(x.name.clone());
    if x.len() != column.len() {
        return Err(bad());
    }
    let xs: Vec<Option<f64>> = x.cells.iter().map(CellValue::as_f64).collect();
    // only positions with a known value or a gap to fill matter, i.e. all of them
    let mut prev: Option<f64> = None;
    let mut out = Vec::with_capacity(xs.len());
    for v in xs {
        let v = v.ok_or_else(bad)?;
        if prev.is_some_and(|p| v <= p) {
            return Err(bad());
        }
        prev = Some(v);
        out.push(v);
    }
    Ok(out)
}

/// Stable ascending sort on a numeric column; `Empty` keys go last.
pub fn sort_rows(table: &Table, by: &str) -> Result<Table, TransformError> {
    let key = table.column(by).ok_or_else(|| TransformError::UnknownColumn(by.to_string()))?;
    if key.cells.iter().any(|c| matches!(c, CellValue::Str(_))) {
        return Err(TransformError::NonNumeric { column: by.to_string(), operation: "sorting".into() });
    }
    let mut order: Vec<usize> = (0..table.row_count()).collect();
    order.sort_by(|&a, &b| compare_keys(&key.cells[a], &key.cells[b]));
    Ok(table.select_rows(&order))
}

fn compare_keys(a: &CellValue, b: &CellValue) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (a, b) {
        (CellValue::Empty, CellValue::Empty) => Ordering::Equal,
        (CellValue::Empty, _) => Ordering::Greater,
        (_, CellValue::Empty) => Ordering::Less,
        (CellValue::Int(x), CellValue::Int(y)) => x.cmp(y),
        _ => {
            let (x, y) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            x.total_cmp(&y)
        }
    }
}

/// Splits rows into phases. Each row whose cut column reads exactly as the
/// marker opens a new segment; rows before the first marker form a
/// preamble segment of their own.
pub fn compute_segments(table: &Table, rule: &CutRule) -> Result<Vec<PhaseSegment>, TransformError> {
    let column = table.column(&rule.column).ok_or_else(|| TransformError::UnknownColumn(rule.column.clone()))?;
    let n = table.row_count();
    let mut starts: Vec<usize> = vec![0];
    starts.extend(
        column
            .cells
            .iter()
            .enumerate()
            .filter(|(i, cell)| *i > 0 && cell.render() == rule.marker)
            .map(|(i, _)| i),
    );
    let mut segments = Vec::with_capacity(starts.len());
    for (index, &start) in starts.iter().enumerate() {
        let end = starts.get(index + 1).copied().unwrap_or(n);
        segments.push(PhaseSegment { start_row: start, end_row_exclusive: end, index });
    }
    Ok(segments)
}

/// Substitutes the segment index for every `#` in an output pattern.
pub fn expand_target(pattern: &str, index: usize) -> String {
    pattern.replace('#', &index.to_string())
}

/// One sanitised table bound for an output path.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportOutput {
    /// The target with `#` expanded, as written in the program.
    pub path: String,
    pub table: Table,
}

/// A completed atomic step of an export, as seen by an observer.
pub struct ExportStep<'a> {
    pub description: String,
    pub table: &'a Table,
    /// Set when the step binds a finished table to an output path.
    pub output: Option<&'a str>,
}

/// Runs an export and returns its outputs.
pub fn run_export(table: &Table, cmd: &ExportCmd) -> Result<Vec<ExportOutput>, TransformError> {
    run_export_observed(table, cmd, |_| Ok::<(), TransformError>(()))
}

/// Runs an export, handing every atomic step to `observe` as it completes.
pub fn run_export_observed<E, F>(table: &Table, cmd: &ExportCmd, mut observe: F) -> Result<Vec<ExportOutput>, E>
where
    E: From<TransformError>,
    F: FnMut(ExportStep<'_>) -> Result<(), E>,
{
    let mut current = project(table, cmd)?;
    for (index, plan) in cmd.plans().enumerate() {
        if let Some(ty) = plan.declared_type {
            let col = enforce_type(&current.columns()[index], ty);
            current = current.with_column(index, col).map_err(TransformError::from)?;
            observe(step(format!("enforce {ty} type on '{}'", plan.output_name), &current))?;
        }
        if let Some(range) = plan.valid_range {
            let col = apply_range(&current.columns()[index], range);
            current = current.with_column(index, col).map_err(TransformError::from)?;
            observe(step(format!("restrict '{}' to {}", plan.output_name, describe_range(range)), &current))?;
        }
        if let Some(strategy) = plan.impute {
            let col = impute(&current.columns()[index], strategy, None)?;
            current = current.with_column(index, col).map_err(TransformError::from)?;
            observe(step(format!("impute '{}' by {strategy}", plan.output_name), &current))?;
        }
    }
    if let Some(key) = &cmd.sort_by {
        current = sort_rows(&current, key)?;
        observe(step(format!("sort rows by '{key}'"), &current))?;
    }

    let outputs: Vec<ExportOutput> = match &cmd.cut {
        None => vec![ExportOutput { path: cmd.target.clone(), table: current }],
        Some(rule) => compute_segments(&current, rule)?
            .into_iter()
            .map(|seg| ExportOutput {
                path: expand_target(&cmd.target, seg.index),
                table: current.slice_rows(seg.start_row, seg.end_row_exclusive),
            })
            .collect(),
    };
    for out in &outputs {
        observe(ExportStep {
            description: format!("write {} rows to '{}'", out.table.row_count(), out.path),
            table: &out.table,
            output: Some(&out.path),
        })?;
    }
    Ok(outputs)
}

fn step(description: String, table: &Table) -> ExportStep<'_> {
    ExportStep { description, table, output: None }
}

fn describe_range(range: ValidRange) -> String {
    use crate::table::format_real;
    format!("[{}, {}]", format_real(range.lo), format_real(range.hi))
}

/// Selects and renames the planned columns, untyped.
fn project(table: &Table, cmd: &ExportCmd) -> Result<Table, TransformError> {
    let columns = cmd
        .plans()
        .map(|plan: &ColumnPlan| {
            table
                .column(&plan.source_name)
                .map(|c| c.clone().renamed(plan.output_name.clone()))
                .ok_or_else(|| TransformError::UnknownColumn(plan.source_name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Table::new(columns)?)
}

/// Number of atomic steps an export performs before its writes.
pub fn transform_step_count(cmd: &ExportCmd) -> usize {
    cmd.plans()
        .map(|p| {
            usize::from(p.declared_type.is_some()) + usize::from(p.valid_range.is_some()) + usize::from(p.impute.is_some())
        })
        .sum::<usize>()
        + usize::from(cmd.sort_by.is_some())
}
