use std::fmt::Write;

use crate::ast::*;
use crate::table::format_real;

/// Renders a program in canonical form: one command per statement, one
/// column mapping per line inside `export`.
pub fn pretty_print(spec: &Spec) -> String {
    let mut out = String::new();
    for cmd in &spec.commands {
        match &cmd.node {
            Command::Inspect(inspect) => {
                let _ = writeln!(out, "inspect csv from {};", quote(&inspect.source));
            }
            Command::Import(import) => print_import(&mut out, import),
            Command::Export(export) => print_export(&mut out, export),
        }
    }
    out
}

/// Single-quotes a string literal, escaping as the lexer expects.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

fn print_import(out: &mut String, import: &ImportCmd) {
    let _ = write!(out, "import csv from {}", quote(&import.source));
    for filter in &import.row_filters {
        out.push_str(match filter {
            RowFilter::SkipEmpty => " skip empty",
            RowFilter::SkipMalformed => " skip malformed",
        });
    }
    for filter in &import.substring_filters {
        let _ = write!(out, " skip {}", quote(&filter.needle));
        if let FilterScope::Column(c) = &filter.scope {
            let _ = write!(out, " in {}", quote(c));
        }
    }
    out.push_str(";\n");
}

fn print_export(out: &mut String, export: &ExportCmd) {
    out.push_str("export csv\n");
    let last = export.columns.len().saturating_sub(1);
    for (i, plan) in export.plans().enumerate() {
        let _ = write!(out, "    {} is {}", quote(&plan.source_name), quote(&plan.output_name));
        if let Some(ty) = plan.declared_type {
            let _ = write!(out, " as {ty}");
        }
        if let Some(range) = plan.valid_range {
            let _ = write!(out, " in [{}, {}]", format_real(range.lo), format_real(range.hi));
        }
        if let Some(strategy) = plan.impute {
            let _ = write!(out, " impute {strategy}");
        }
        out.push_str(if i < last { ",\n" } else { "\n" });
    }
    let _ = write!(out, "    to {}", quote(&export.target));
    if let Some(key) = &export.sort_by {
        let _ = write!(out, " sort by {}", quote(key));
    }
    if let Some(cut) = &export.cut {
        let _ = write!(out, " cut when {} is {}", quote(&cut.column), quote(&cut.marker));
    }
    out.push_str(";\n");
}
