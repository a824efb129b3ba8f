//! Baseline program generation from a raw CSV.

use std::path::Path;

use crate::ast::{ColumnPlan, ColumnType, Command, ExportCmd, ImportCmd, Spec};
use crate::parser::pretty_print;
use crate::table::{parse_int, parse_real, read_csv, CellValue, Column, Table, TableError};

/// Narrowest type every non-empty cell of the column parses as: `int`, then
/// `real`, then `str`. Columns without values are `str`.
pub fn infer_column_type(column: &Column) -> ColumnType {
    let texts: Vec<String> = column.cells.iter().filter(|c| !c.is_empty()).map(CellValue::render).collect();
    if texts.is_empty() {
        ColumnType::Str
    } else if texts.iter().all(|t| parse_int(t).is_some()) {
        ColumnType::Int
    } else if texts.iter().all(|t| parse_real(t).is_some()) {
        ColumnType::Real
    } else {
        ColumnType::Str
    }
}

/// Inferred type per column, in column order.
pub fn infer_types(table: &Table) -> Vec<(String, ColumnType)> {
    table.columns().iter().map(|c| (c.name.clone(), infer_column_type(c))).collect()
}

/// Output name of a baseline export: `<stem>_clean.csv`.
pub fn baseline_target(source: &str) -> String {
    let stem = Path::new(source).file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    format!("{stem}_clean.csv")
}

/// An import of `source` followed by an export mapping every column to
/// itself with its inferred type.
pub fn baseline_spec(source: &str, table: &Table) -> Spec {
    let plans = infer_types(table).into_iter().map(|(name, ty)| ColumnPlan::identity(name).typed(ty)).collect();
    Spec::new(vec![
        Command::Import(ImportCmd { source: source.to_string(), ..Default::default() }),
        Command::Export(ExportCmd::new(plans, baseline_target(source))),
    ])
}

/// Reads `path` and renders its baseline program. `source` is the path as
/// it should appear in the program's `import`.
pub fn generate_baseline_spec(path: &Path, source: &str) -> Result<String, TableError> {
    let table = read_csv(path, &[])?;
    Ok(pretty_print(&baseline_spec(source, &table)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::validate_spec;
    use crate::parser::parse;
    use crate::table::parse_csv;

    fn ty(cells: &[&str]) -> ColumnType {
        infer_column_type(&Column::from_text("c", cells))
    }

    #[test]
    fn inference_widening() {
        assert_eq!(ty(&["1", "2", "3"]), ColumnType::Int);
        assert_eq!(ty(&["1", "2.5"]), ColumnType::Real);
        assert_eq!(ty(&["1.5", "abc"]), ColumnType::Str);
        assert_eq!(ty(&["", " "]), ColumnType::Str);
        assert_eq!(ty(&["1", "", "2"]), ColumnType::Int);
    }

    #[test]
    fn baseline_for_int_and_string_columns() {
        let table = parse_csv("A,B\n1,x\n2,\n", &[]).unwrap();
        let text = pretty_print(&baseline_spec("data.csv", &table));
        assert_eq!(
            text,
            "import csv from 'data.csv';\nexport csv\n    'A' is 'A' as int,\n    'B' is 'B' as str\n    to 'data_clean.csv';\n"
        );
        let spec = parse(&text).unwrap();
        assert!(validate_spec(&spec).is_empty());
    }

    #[test]
    fn zero_rows_means_all_str() {
        let table = parse_csv("A,B\n", &[]).unwrap();
        assert!(infer_types(&table).iter().all(|(_, t)| *t == ColumnType::Str));
    }
}
