//! Compiles a program into a standalone Python script built on pandas and
//! numpy.
//!
//! The script bakes in the configured input and output directories, emits
//! only the helpers it uses, and precedes every fragment with a one-line
//! comment naming the directive it implements. It follows the transforms
//! module step for step, including the canonical number format on write.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::{
    validate_spec, ColumnType, Command, Diagnostic, ExportCmd, FilterScope, ImportCmd, ImputeStrategy, RowFilter, Spec,
};
use crate::config::RunConfig;
use crate::table::format_real;

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("program is not valid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// Python string literal for `s`.
pub fn py_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\x{:02x}", c as u32);
            }
            c if c.is_control() => {
                let _ = write!(out, "\\U{:08x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// A float literal that Python reads back as the same value.
fn py_float(v: f64) -> String {
    format_real(v)
}

/// Keeps a comment on one line.
fn comment_text(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Helper {
    Patterns,
    ReadTable,
    RemoveSubstring,
    SelectColumns,
    ToInt,
    ToReal,
    Within,
    RestoreKind,
    ImputeMean,
    ImputeMedian,
    ImputeLinear,
    ImputePolynomial,
    Render,
    WriteTable,
    CutSegments,
    InferType,
    CpsQuote,
}

impl Helper {
    fn requires(self) -> &'static [Helper] {
        use Helper::*;
        match self {
            ToInt | ToReal | InferType => &[Patterns],
            ImputeMean | ImputeMedian | ImputeLinear | ImputePolynomial => &[RestoreKind],
            WriteTable | CutSegments => &[Render],
            _ => &[],
        }
    }

    fn source(self) -> &'static str {
        match self {
            Helper::Patterns => PATTERNS,
            Helper::ReadTable => READ_TABLE,
            Helper::RemoveSubstring => REMOVE_SUBSTRING,
            Helper::SelectColumns => SELECT_COLUMNS,
            Helper::ToInt => TO_INT,
            Helper::ToReal => TO_REAL,
            Helper::Within => WITHIN,
            Helper::RestoreKind => RESTORE_KIND,
            Helper::ImputeMean => IMPUTE_MEAN,
            Helper::ImputeMedian => IMPUTE_MEDIAN,
            Helper::ImputeLinear => IMPUTE_LINEAR,
            Helper::ImputePolynomial => IMPUTE_POLYNOMIAL,
            Helper::Render => RENDER,
            Helper::WriteTable => WRITE_TABLE,
            Helper::CutSegments => CUT_SEGMENTS,
            Helper::InferType => INFER_TYPE,
            Helper::CpsQuote => CPS_QUOTE,
        }
    }
}

struct Emitter {
    body: String,
    helpers: BTreeSet<Helper>,
}

impl Emitter {
    fn use_helper(&mut self, helper: Helper) {
        if self.helpers.insert(helper) {
            for &dep in helper.requires() {
                self.use_helper(dep);
            }
        }
    }

    /// One commented fragment inside `main`.
    fn fragment(&mut self, comment: &str, lines: &[String]) {
        let _ = writeln!(self.body, "    # {}", comment_text(comment));
        for line in lines {
            let _ = writeln!(self.body, "    {line}");
        }
    }
}

/// Generates the Python script for a validated program.
///
/// `spec_label` names the program in the script header.
pub fn generate_script(spec: &Spec, config: &RunConfig, spec_label: &str) -> Result<String, CodegenError> {
    let diagnostics = validate_spec(spec);
    if !diagnostics.is_empty() {
        return Err(CodegenError::Invalid(diagnostics));
    }
    let mut em = Emitter { body: String::new(), helpers: BTreeSet::new() };
    for cmd in &spec.commands {
        match &cmd.node {
            Command::Inspect(inspect) => emit_inspect(&mut em, &inspect.source),
            Command::Import(import) => emit_import(&mut em, import),
            Command::Export(export) => emit_export(&mut em, export),
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "#!/usr/bin/env python3");
    let _ = writeln!(out, "# Sanitisation script generated by cpslint from {}.", comment_text(spec_label));
    let _ = writeln!(out, "# Regenerate it from the program rather than editing it by hand.");
    out.push('\n');
    out.push_str("# Standard library and dataframe imports\n");
    out.push_str("import csv\nimport math\nimport os\nimport re\nimport sys\n\nimport numpy as np\nimport pandas as pd\n\n");
    out.push_str("# Locations baked in from the run configuration\n");
    let _ = writeln!(out, "INPUT_DIR = {}", py_str(&config.input_dir.display().to_string()));
    let _ = writeln!(out, "OUTPUT_DIR = {}", py_str(&config.output_dir.display().to_string()));
    for helper in &em.helpers {
        out.push_str("\n\n");
        out.push_str(helper.source().trim_start_matches('\n'));
    }
    out.push_str("\n\ndef main():\n");
    out.push_str(&em.body);
    out.push_str("\n\nif __name__ == \"__main__\":\n    main()\n");
    Ok(out)
}

fn emit_inspect(em: &mut Emitter, source: &str) {
    em.use_helper(Helper::ReadTable);
    em.use_helper(Helper::InferType);
    em.use_helper(Helper::CpsQuote);
    let stem = Path::new(source).file_stem().and_then(|s| s.to_str()).unwrap_or("baseline").to_string();
    em.fragment(&format!("inspect '{source}': load it without filters"), &[format!(
        "table = read_table(os.path.join(INPUT_DIR, {}), skip_empty=False, skip_malformed=False)",
        py_str(source)
    )]);
    em.fragment("infer the narrowest type of every column and map each column to itself", &[
        "plans = [f\"    {cps_quote(name)} is {cps_quote(name)} as {infer_type(table[name])}\" for name in table.columns]"
            .into(),
    ]);
    em.fragment("write the baseline program next to the outputs", &[
        format!("baseline = os.path.join(OUTPUT_DIR, {})", py_str(&format!("{stem}.cps"))),
        "os.makedirs(OUTPUT_DIR, exist_ok=True)".into(),
        format!("source, target = {}, {}", py_str(source), py_str(&format!("{stem}_clean.csv"))),
        "with open(baseline, \"w\", encoding=\"utf-8\") as handle:".into(),
        "    handle.write(f\"import csv from {cps_quote(source)};\\n\")".into(),
        "    handle.write(\"export csv\\n\")".into(),
        "    handle.write(\",\\n\".join(plans) + \"\\n\")".into(),
        "    handle.write(f\"    to {cps_quote(target)};\\n\")".into(),
        "print(f\"wrote {baseline}\")".into(),
    ]);
}

fn emit_import(em: &mut Emitter, import: &ImportCmd) {
    em.use_helper(Helper::ReadTable);
    let skip_empty = import.row_filters.contains(&RowFilter::SkipEmpty);
    let skip_malformed = import.row_filters.contains(&RowFilter::SkipMalformed);
    let mut what = format!("import '{}'", import.source);
    let filters: Vec<&str> = [(skip_empty, "skip empty"), (skip_malformed, "skip malformed")]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
    if !filters.is_empty() {
        let _ = write!(what, " ({})", filters.join(", "));
    }
    let py_bool = |b: bool| if b { "True" } else { "False" };
    em.fragment(&what, &[format!(
        "table = read_table(os.path.join(INPUT_DIR, {}), skip_empty={}, skip_malformed={})",
        py_str(&import.source),
        py_bool(skip_empty),
        py_bool(skip_malformed)
    )]);
    for filter in &import.substring_filters {
        em.use_helper(Helper::RemoveSubstring);
        let (scope, arg) = match &filter.scope {
            FilterScope::AllColumns => ("all columns".to_string(), "None".to_string()),
            FilterScope::Column(c) => (format!("'{c}'"), format!("[{}]", py_str(c))),
        };
        em.fragment(&format!("remove '{}' from {scope}", filter.needle), &[format!(
            "table = remove_substring(table, {}, {arg})",
            py_str(&filter.needle)
        )]);
    }
}

fn emit_export(em: &mut Emitter, export: &ExportCmd) {
    em.use_helper(Helper::SelectColumns);
    em.use_helper(Helper::WriteTable);
    let mapping: Vec<String> =
        export.plans().map(|p| format!("({}, {})", py_str(&p.source_name), py_str(&p.output_name))).collect();
    em.fragment(&format!("export to '{}': select and rename the mapped columns", export.target), &[format!(
        "out = select_columns(table, [{}])",
        mapping.join(", ")
    )]);

    for plan in export.plans() {
        let col = py_str(&plan.output_name);
        if let Some(ty) = plan.declared_type {
            let call = match ty {
                ColumnType::Int => {
                    em.use_helper(Helper::ToInt);
                    format!("out[{col}] = to_int(out[{col}])")
                }
                ColumnType::Real => {
                    em.use_helper(Helper::ToReal);
                    format!("out[{col}] = to_real(out[{col}])")
                }
                ColumnType::Str => format!("out[{col}] = out[{col}].astype(object)"),
            };
            em.fragment(&format!("enforce {ty} type on '{}'", plan.output_name), &[call]);
        }
        if let Some(range) = plan.valid_range {
            em.use_helper(Helper::Within);
            em.fragment(
                &format!(
                    "restrict '{}' to [{}, {}]",
                    plan.output_name,
                    format_real(range.lo),
                    format_real(range.hi)
                ),
                &[format!("out[{col}] = within(out[{col}], {}, {})", py_float(range.lo), py_float(range.hi))],
            );
        }
        if let Some(strategy) = plan.impute {
            let call = match strategy {
                ImputeStrategy::Mean => {
                    em.use_helper(Helper::ImputeMean);
                    format!("out[{col}] = impute_mean(out[{col}], {col})")
                }
                ImputeStrategy::Median => {
                    em.use_helper(Helper::ImputeMedian);
                    format!("out[{col}] = impute_median(out[{col}], {col})")
                }
                ImputeStrategy::ForwardFill => format!("out[{col}] = out[{col}].ffill()"),
                ImputeStrategy::BackFill => format!("out[{col}] = out[{col}].bfill()"),
                ImputeStrategy::Linear => {
                    em.use_helper(Helper::ImputeLinear);
                    format!("out[{col}] = impute_linear(out[{col}])")
                }
                ImputeStrategy::Polynomial(order) => {
                    em.use_helper(Helper::ImputePolynomial);
                    format!("out[{col}] = impute_polynomial(out[{col}], {order}, {col})")
                }
            };
            em.fragment(&format!("impute '{}' by {strategy}", plan.output_name), &[call]);
        }
    }

    if let Some(key) = &export.sort_by {
        em.fragment(&format!("sort rows by '{key}'"), &[format!(
            "out = out.sort_values({}, kind=\"stable\", na_position=\"last\").reset_index(drop=True)",
            py_str(key)
        )]);
    }

    match &export.cut {
        None => em.fragment(&format!("write '{}'", export.target), &[format!(
            "write_table(out, os.path.join(OUTPUT_DIR, {}))",
            py_str(&export.target)
        )]),
        Some(rule) => {
            em.use_helper(Helper::CutSegments);
            em.fragment(
                &format!(
                    "cut when '{}' is '{}' and write each segment to '{}'",
                    rule.column, rule.marker, export.target
                ),
                &[
                    format!(
                        "for index, segment in enumerate(cut_segments(out, {}, {})):",
                        py_str(&rule.column),
                        py_str(&rule.marker)
                    ),
                    format!(
                        "    write_table(segment, os.path.join(OUTPUT_DIR, {}.replace(\"#\", str(index))))",
                        py_str(&export.target)
                    ),
                ],
            );
        }
    }
}

/// `<spec-stem>.py` inside `dir`.
pub fn script_path_for(spec_path: &Path, dir: &Path) -> PathBuf {
    let stem = spec_path.file_stem().and_then(|s| s.to_str()).unwrap_or("program");
    dir.join(format!("{stem}.py"))
}

pub fn write_script(text: &str, path: &Path) -> Result<(), CodegenError> {
    std::fs::write(path, text).map_err(|source| CodegenError::Io { path: path.to_path_buf(), source })
}

const PATTERNS: &str = r#"
# Literal syntax accepted for int and real cells
INT_PATTERN = r"[+-]?[0-9]+"
REAL_PATTERN = r"[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?"
INT_MIN, INT_MAX = -(2 ** 63), 2 ** 63 - 1
"#;

const READ_TABLE: &str = r#"
# Load a CSV as text cells; blank cells become missing and row filters drop rows
def read_table(path, skip_empty, skip_malformed):
    with open(path, newline="", encoding="utf-8-sig") as handle:
        records = list(csv.reader(handle))
    if not records or not records[0]:
        sys.exit(f"{path}: missing header row")
    header, body = records[0], records[1:]
    if any(name == "" for name in header) or len(set(header)) != len(header):
        sys.exit(f"{path}: header names must be nonempty and distinct")
    width = len(header)
    rows = []
    for number, record in enumerate(body, start=2):
        if record and len(record) != width:
            if skip_malformed:
                continue
            if len(record) > width:
                sys.exit(f"{path}: record {number}: expected {width} fields, found {len(record)}")
        cells = [None if value.strip() == "" else value for value in record]
        cells += [None] * (width - len(cells))
        if skip_empty and all(cell is None for cell in cells):
            continue
        rows.append(cells)
    return pd.DataFrame(rows, columns=header, dtype=object)
"#;

const REMOVE_SUBSTRING: &str = r#"
# Remove a substring from text cells until no occurrence is left
def remove_substring(frame, needle, columns):
    def strip(value):
        if not isinstance(value, str):
            return value
        while needle in value:
            value = value.replace(needle, "")
        return None if value.strip() == "" else value

    frame = frame.copy()
    for name in frame.columns if columns is None else columns:
        if name not in frame.columns:
            sys.exit(f"unknown column '{name}'")
        frame[name] = frame[name].map(strip).astype(object)
    return frame
"#;

const SELECT_COLUMNS: &str = r#"
# Select the mapped source columns under their output names
def select_columns(frame, mapping):
    for source, _ in mapping:
        if source not in frame.columns:
            sys.exit(f"unknown column '{source}'")
    selected = pd.DataFrame({output: frame[source].copy() for source, output in mapping}, index=frame.index)
    return selected.reset_index(drop=True)
"#;

const TO_INT: &str = r#"
# Parse cells as 64-bit integers; anything else becomes missing
def to_int(column):
    text = column.astype("string").str.strip()
    valid = text.str.fullmatch(INT_PATTERN).fillna(False).astype(bool)
    numbers = text[valid].map(int)
    numbers = numbers[(numbers >= INT_MIN) & (numbers <= INT_MAX)]
    result = pd.Series(pd.NA, index=column.index, dtype="Int64")
    result[numbers.index] = numbers.astype("int64")
    return result
"#;

const TO_REAL: &str = r#"
# Parse cells as finite reals; anything else becomes missing
def to_real(column):
    text = column.astype("string").str.strip()
    valid = text.str.fullmatch(REAL_PATTERN).fillna(False).astype(bool)
    result = pd.Series(np.nan, index=column.index, dtype="float64")
    result[valid] = text[valid].map(float).astype("float64")
    return result.where(np.isfinite(result))
"#;

const WITHIN: &str = r#"
# Keep values inside the inclusive range; others become missing
def within(column, low, high):
    inside = ((column >= low) & (column <= high)).fillna(False).astype(bool)
    return column.where(inside)
"#;

const RESTORE_KIND: &str = r#"
# Imputed reals go back into integer columns rounded half away from zero
def restore_kind(original, filled):
    if str(original.dtype) == "Int64" and original.notna().any():
        rounded = np.sign(filled) * np.floor(np.abs(filled) + 0.5)
        return rounded.astype("Int64")
    return filled
"#;

const IMPUTE_MEAN: &str = r#"
# Fill gaps with the mean of the known values
def impute_mean(column, name):
    if not column.isna().any():
        return column
    values = column.astype("float64")
    if values.notna().sum() == 0:
        sys.exit(f"cannot impute '{name}' by mean: the column has no known values")
    return restore_kind(column, values.fillna(values.mean()))
"#;

const IMPUTE_MEDIAN: &str = r#"
# Fill gaps with the median of the known values
def impute_median(column, name):
    if not column.isna().any():
        return column
    values = column.astype("float64")
    if values.notna().sum() == 0:
        sys.exit(f"cannot impute '{name}' by median: the column has no known values")
    return restore_kind(column, values.fillna(values.median()))
"#;

const IMPUTE_LINEAR: &str = r#"
# Interpolate gaps linearly over the row index; leading and trailing gaps stay
def impute_linear(column):
    if not column.isna().any():
        return column
    filled = column.astype("float64").interpolate(method="linear", limit_area="inside")
    return restore_kind(column, filled)
"#;

const IMPUTE_POLYNOMIAL: &str = r#"
# Fit one least-squares polynomial over the row index and evaluate it in the gaps
def impute_polynomial(column, order, name):
    values = column.astype("float64").to_numpy()
    known = ~np.isnan(values)
    if known.all():
        return column
    if known.sum() < order + 1:
        sys.exit(f"cannot impute '{name}': order {order} needs {order + 1} known values, found {known.sum()}")
    x = np.arange(len(values), dtype="float64")
    low, high = x[known].min(), x[known].max()
    centre, scale = (low + high) / 2, (high - low) / 2
    u = (x - centre) / (scale if scale != 0 else 1.0)
    coefficients = np.polynomial.polynomial.polyfit(u[known], values[known], order)
    values[~known] = np.polynomial.polynomial.polyval(u[~known], coefficients)
    return restore_kind(column, pd.Series(values, index=column.index))
"#;

const RENDER: &str = r#"
# Canonical cell text: plain integers, shortest round-trip reals with a fractional digit
def render(column):
    if str(column.dtype) == "Int64":
        text = column.map(lambda v: str(int(v)), na_action="ignore")
    elif column.dtype == "float64":
        text = column.map(lambda v: np.format_float_positional(v, unique=True, trim="0"), na_action="ignore")
    else:
        text = column.map(str, na_action="ignore")
    return text.astype(object).where(column.notna(), "")
"#;

const WRITE_TABLE: &str = r#"
# Write a frame as CSV in canonical form
def write_table(frame, path):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    columns = [render(frame[name]).tolist() for name in frame.columns]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(frame.columns)
        writer.writerows(zip(*columns))
    print(f"wrote {path}")
"#;

const CUT_SEGMENTS: &str = r#"
# Split rows into phases: every row whose cell reads as the marker opens a segment
def cut_segments(frame, column, marker):
    hits = np.flatnonzero((render(frame[column]) == marker).to_numpy())
    bounds = [0] + [int(i) for i in hits if i > 0] + [len(frame)]
    return [frame.iloc[start:end] for start, end in zip(bounds, bounds[1:])]
"#;

const INFER_TYPE: &str = r#"
# Narrowest type all known cells parse as: int, then real, then str
def infer_type(column):
    text = column.dropna().astype(str).str.strip()
    if text.empty:
        return "str"
    if text.str.fullmatch(INT_PATTERN).all() and text.map(int).map(lambda v: INT_MIN <= v <= INT_MAX).all():
        return "int"
    if text.str.fullmatch(REAL_PATTERN).all() and text.map(float).map(math.isfinite).all():
        return "real"
    return "str"
"#;

const CPS_QUOTE: &str = r#"
# Quote a name as a cpslint string literal
def cps_quote(text):
    for raw, escaped in (("\\", "\\\\"), ("'", "\\'"), ("\n", "\\n"), ("\t", "\\t"), ("\r", "\\r")):
        text = text.replace(raw, escaped)
    return f"'{text}'"
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Pipeline;
    use crate::parser::parse;

    fn config() -> RunConfig {
        RunConfig::new("/data/in", "/data/out", Pipeline::Compiler).with_python("python3")
    }

    const EXAMPLE_ONE: &str = "
        import csv from 'raw.csv' skip empty;
        export csv 'Timestamp' is 'Timestamp' as real,
                   'Voltage' is 'Voltage' as real in [0.0, 15.0],
                   'Current' is 'Current' as real in [0.0, 5.0]
                   to 'out.csv';
    ";

    #[test]
    fn example_one_sections() {
        let script = generate_script(&parse(EXAMPLE_ONE).unwrap(), &config(), "out_of_bounds.cps").unwrap();
        let order = [
            "# import 'raw.csv' (skip empty)",
            "# enforce real type on 'Voltage'",
            "# restrict 'Voltage' to [0.0, 15.0]",
            "# write 'out.csv'",
        ];
        let positions: Vec<usize> = order.iter().map(|s| script.find(s).unwrap_or_else(|| panic!("{s}"))).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(script.contains("import pandas as pd"));
        assert!(script.contains("INPUT_DIR = '/data/in'"));
        assert!(!script.contains("def impute_linear"));
    }

    #[test]
    fn every_line_of_main_follows_a_comment() {
        let src = "import csv from 'raw.csv' skip '#' skip '!' in 'UART';
            export csv 'V' is 'V' as real impute linear interpolation, 'U' is 'U' impute forward fill
            to 'o#.csv' sort by 'V' cut when 'U' is 'go';";
        let script = generate_script(&parse(src).unwrap(), &config(), "x.cps").unwrap();
        let main = script.split("def main():\n").nth(1).unwrap();
        let body: Vec<&str> = main.lines().take_while(|l| l.starts_with("    ") || l.is_empty()).collect();
        assert!(body[0].trim_start().starts_with('#'));
        for directive in [
            "remove '#' from all columns",
            "remove '!' from 'UART'",
            "impute 'V' by linear interpolation",
            "impute 'U' by forward fill",
            "sort rows by 'V'",
            "cut when 'U' is 'go'",
        ] {
            assert!(script.contains(&format!("# {directive}")), "{directive}");
        }
    }

    #[test]
    fn deterministic() {
        let spec = parse(EXAMPLE_ONE).unwrap();
        assert_eq!(
            generate_script(&spec, &config(), "a.cps").unwrap(),
            generate_script(&spec, &config(), "a.cps").unwrap()
        );
    }

    #[test]
    fn invalid_programs_are_rejected() {
        let spec = parse("export csv 'a' is 'a' to 'o.csv';").unwrap();
        assert!(matches!(generate_script(&spec, &config(), "a.cps"), Err(CodegenError::Invalid(_))));
    }

    #[test]
    fn python_literals() {
        assert_eq!(py_str("it's\n"), "'it\\'s\\n'");
        assert_eq!(py_str("a\\b\u{1}"), "'a\\\\b\\x01'");
        assert_eq!(py_str("é"), "'é'");
    }

    #[test]
    fn script_naming() {
        assert_eq!(script_path_for(Path::new("x/out_of_bounds.cps"), Path::new("o")), PathBuf::from("o/out_of_bounds.py"));
    }
}
