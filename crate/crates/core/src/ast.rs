//! Abstract syntax of cpslint programs and structural validation.
//!
//! A program knows three commands: `inspect`, `import` and `export`. The
//! types here are plain values; source locations ride along in [`Located`]
//! wrappers that never take part in structural equality, so a program
//! built by hand compares equal to the same program parsed from text.

use std::fmt;

/// A position in source text. Lines and columns are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceLocation {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl SourceLocation {
    pub const START: SourceLocation = SourceLocation { line: 1, column: 1, offset: 0 };
}

impl Default for SourceLocation {
    fn default() -> Self {
        Self::START
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A syntax node paired with the location it was parsed from.
///
/// Equality compares only the node.
#[derive(Debug, Clone)]
pub struct Located<T> {
    pub node: T,
    pub location: SourceLocation,
}

impl<T> Located<T> {
    pub fn new(node: T, location: SourceLocation) -> Self {
        Located { node, location }
    }

    /// Wraps a node built in code rather than parsed.
    pub fn synthetic(node: T) -> Self {
        Located { node, location: SourceLocation::START }
    }
}

impl<T: PartialEq> PartialEq for Located<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T> std::ops::Deref for Located<T> {
    type Target = T;

    fn deref(&self) -> &T {
        &self.node
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub commands: Vec<Located<Command>>,
}

impl Spec {
    pub fn new(commands: Vec<Command>) -> Self {
        Spec { commands: commands.into_iter().map(Located::synthetic).collect() }
    }

    pub fn imports(&self) -> impl Iterator<Item = &ImportCmd> {
        self.commands.iter().filter_map(|c| match &c.node {
            Command::Import(i) => Some(i),
            _ => None,
        })
    }

    pub fn exports(&self) -> impl Iterator<Item = &ExportCmd> {
        self.commands.iter().filter_map(|c| match &c.node {
            Command::Export(e) => Some(e),
            _ => None,
        })
    }

    pub fn inspect(&self) -> Option<&InspectCmd> {
        self.commands.iter().find_map(|c| match &c.node {
            Command::Inspect(i) => Some(i),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Inspect(InspectCmd),
    Import(ImportCmd),
    Export(ExportCmd),
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::Inspect(_) => "inspect",
            Command::Import(_) => "import",
            Command::Export(_) => "export",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InspectCmd {
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ImportCmd {
    pub source: String,
    pub row_filters: Vec<RowFilter>,
    pub substring_filters: Vec<SubstringFilter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowFilter {
    /// Drop rows whose every field is blank.
    SkipEmpty,
    /// Drop rows whose field count differs from the header.
    SkipMalformed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterScope {
    AllColumns,
    Column(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstringFilter {
    pub needle: String,
    pub scope: FilterScope,
}

impl SubstringFilter {
    pub fn everywhere(needle: impl Into<String>) -> Self {
        SubstringFilter { needle: needle.into(), scope: FilterScope::AllColumns }
    }

    pub fn in_column(needle: impl Into<String>, column: impl Into<String>) -> Self {
        SubstringFilter { needle: needle.into(), scope: FilterScope::Column(column.into()) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportCmd {
    pub columns: Vec<Located<ColumnPlan>>,
    pub target: String,
    pub sort_by: Option<String>,
    pub cut: Option<CutRule>,
}

impl ExportCmd {
    pub fn new(columns: Vec<ColumnPlan>, target: impl Into<String>) -> Self {
        ExportCmd {
            columns: columns.into_iter().map(Located::synthetic).collect(),
            target: target.into(),
            sort_by: None,
            cut: None,
        }
    }

    pub fn plans(&self) -> impl Iterator<Item = &ColumnPlan> {
        self.columns.iter().map(|c| &c.node)
    }

    pub fn plan_for_output(&self, name: &str) -> Option<&ColumnPlan> {
        self.plans().find(|p| p.output_name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnType {
    Int,
    Real,
    Str,
}

impl ColumnType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Int | ColumnType::Real)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ColumnType::Int => "int",
            ColumnType::Real => "real",
            ColumnType::Str => "str",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValidRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        ValidRange { lo, hi }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

pub const MAX_POLYNOMIAL_ORDER: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImputeStrategy {
    Mean,
    Median,
    ForwardFill,
    BackFill,
    Linear,
    Polynomial(u32),
}

impl ImputeStrategy {
    /// Whether the strategy does arithmetic on cell values.
    pub fn is_numeric(self) -> bool {
        !matches!(self, ImputeStrategy::ForwardFill | ImputeStrategy::BackFill)
    }
}

impl fmt::Display for ImputeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImputeStrategy::Mean => f.write_str("mean"),
            ImputeStrategy::Median => f.write_str("median"),
            ImputeStrategy::ForwardFill => f.write_str("forward fill"),
            ImputeStrategy::BackFill => f.write_str("back fill"),
            ImputeStrategy::Linear => f.write_str("linear interpolation"),
            ImputeStrategy::Polynomial(k) => write!(f, "polynomial interpolation {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPlan {
    pub source_name: String,
    pub output_name: String,
    pub declared_type: Option<ColumnType>,
    pub valid_range: Option<ValidRange>,
    pub impute: Option<ImputeStrategy>,
}

impl ColumnPlan {
    pub fn new(source: impl Into<String>, output: impl Into<String>) -> Self {
        ColumnPlan {
            source_name: source.into(),
            output_name: output.into(),
            declared_type: None,
            valid_range: None,
            impute: None,
        }
    }

    /// A plan keeping the column name unchanged.
    pub fn identity(name: impl Into<String>) -> Self {
        let name = name.into();
        ColumnPlan::new(name.clone(), name)
    }

    pub fn typed(mut self, ty: ColumnType) -> Self {
        self.declared_type = Some(ty);
        self
    }

    pub fn ranged(mut self, lo: f64, hi: f64) -> Self {
        self.valid_range = Some(ValidRange::new(lo, hi));
        self
    }

    pub fn imputed(mut self, strategy: ImputeStrategy) -> Self {
        self.impute = Some(strategy);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutRule {
    pub column: String,
    pub marker: String,
}

/// A structural problem found in a [`Spec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: SourceLocation,
    pub message: String,
}

impl Diagnostic {
    fn at(location: SourceLocation, message: impl Into<String>) -> Self {
        Diagnostic { location, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Checks every structural invariant of a program, independent of any data.
///
/// An empty result means the program is well formed.
pub fn validate_spec(spec: &Spec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if spec.commands.is_empty() {
        out.push(Diagnostic::at(SourceLocation::START, "program contains no commands"));
        return out;
    }

    let has_inspect = spec.commands.iter().any(|c| matches!(c.node, Command::Inspect(_)));
    if has_inspect && spec.commands.len() > 1 {
        for cmd in spec.commands.iter().filter(|c| matches!(c.node, Command::Inspect(_))) {
            out.push(Diagnostic::at(cmd.location, "inspect must be the only command in its program"));
        }
    }

    let mut seen_import = false;
    for cmd in &spec.commands {
        let loc = cmd.location;
        match &cmd.node {
            Command::Inspect(inspect) => {
                if inspect.source.is_empty() {
                    out.push(Diagnostic::at(loc, "inspect source path is empty"));
                }
            }
            Command::Import(import) => {
                if seen_import {
                    out.push(Diagnostic::at(loc, "only one import command is allowed per program"));
                }
                seen_import = true;
                validate_import(import, loc, &mut out);
            }
            Command::Export(export) => {
                if !seen_import {
                    out.push(Diagnostic::at(loc, "export without prior import"));
                }
                validate_export(export, loc, &mut out);
            }
        }
    }
    out
}

fn validate_import(import: &ImportCmd, loc: SourceLocation, out: &mut Vec<Diagnostic>) {
    if import.source.is_empty() {
        out.push(Diagnostic::at(loc, "import source path is empty"));
    }
    for (i, filter) in import.row_filters.iter().enumerate() {
        if import.row_filters[..i].contains(filter) {
            let name = match filter {
                RowFilter::SkipEmpty => "skip empty",
                RowFilter::SkipMalformed => "skip malformed",
            };
            out.push(Diagnostic::at(loc, format!("duplicate row filter `{name}`")));
        }
    }
    for filter in &import.substring_filters {
        if filter.needle.is_empty() {
            out.push(Diagnostic::at(loc, "substring filter needle is empty"));
        }
        if let FilterScope::Column(c) = &filter.scope {
            if c.is_empty() {
                out.push(Diagnostic::at(loc, "substring filter column name is empty"));
            }
        }
    }
}

fn validate_export(export: &ExportCmd, loc: SourceLocation, out: &mut Vec<Diagnostic>) {
    if export.columns.is_empty() {
        out.push(Diagnostic::at(loc, "export maps no columns"));
    }
    if export.target.is_empty() {
        out.push(Diagnostic::at(loc, "export target path is empty"));
    }

    for (i, plan) in export.columns.iter().enumerate() {
        let ploc = plan.location;
        if plan.source_name.is_empty() || plan.output_name.is_empty() {
            out.push(Diagnostic::at(ploc, "column names must be nonempty"));
        }
        if export.columns[..i].iter().any(|p| p.output_name == plan.output_name) {
            out.push(Diagnostic::at(
                ploc,
                format!("duplicate output column '{}'", plan.output_name),
            ));
        }
        let numeric = plan.declared_type.is_some_and(ColumnType::is_numeric);
        if let Some(range) = plan.valid_range {
            if !numeric {
                out.push(Diagnostic::at(
                    ploc,
                    format!("valid range on '{}' requires an int or real type", plan.output_name),
                ));
            }
            if !(range.lo.is_finite() && range.hi.is_finite()) {
                out.push(Diagnostic::at(ploc, "range bounds must be finite"));
            } else if range.lo > range.hi {
                out.push(Diagnostic::at(
                    ploc,
                    format!("empty range [{}, {}]: lower bound exceeds upper bound", range.lo, range.hi),
                ));
            }
        }
        if let Some(strategy) = plan.impute {
            if strategy.is_numeric() && !numeric {
                out.push(Diagnostic::at(
                    ploc,
                    format!("`{strategy}` imputation on '{}' requires an int or real type", plan.output_name),
                ));
            }
            if let ImputeStrategy::Polynomial(order) = strategy {
                if order == 0 || order > MAX_POLYNOMIAL_ORDER {
                    out.push(Diagnostic::at(
                        ploc,
                        format!("polynomial order must be between 1 and {MAX_POLYNOMIAL_ORDER}, got {order}"),
                    ));
                }
            }
        }
    }

    if let Some(key) = &export.sort_by {
        match export.plan_for_output(key) {
            None => out.push(Diagnostic::at(loc, format!("sort column '{key}' is not an exported column"))),
            Some(plan) if !plan.declared_type.is_some_and(ColumnType::is_numeric) => out.push(
                Diagnostic::at(loc, format!("sort column '{key}' must be declared int or real")),
            ),
            Some(_) => {}
        }
    }

    if let Some(cut) = &export.cut {
        if cut.column.is_empty() || cut.marker.is_empty() {
            out.push(Diagnostic::at(loc, "cut rule column and marker must be nonempty"));
        } else if export.plan_for_output(&cut.column).is_none() {
            out.push(Diagnostic::at(loc, format!("cut column '{}' is not an exported column", cut.column)));
        }
        if !export.target.contains('#') {
            out.push(Diagnostic::at(loc, "cut rule requires a `#` placeholder in the export target"));
        }
    }
}
