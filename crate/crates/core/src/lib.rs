//! cpslint: a small declarative language for inspecting, sanitising,
//! imputing and cutting time-series CSV traces from cyber-physical systems.
//!
//! A program is parsed into a [`Spec`], checked with [`validate_spec`] and
//! then run by one of two back-ends: the [`interpreter`], which executes it
//! directly and records every intermediate table, or [`codegen`], which
//! emits an equivalent standalone Python script.

pub mod ast;
pub mod codegen;
pub mod config;
pub mod corruptor;
pub mod diff;
pub mod fixtures;
pub mod inspector;
pub mod interpreter;
pub mod numeric;
pub mod parser;
pub mod runner;
pub mod table;
pub mod transforms;

pub use ast::{validate_spec, Command, Diagnostic, Spec};
pub use config::{Pipeline, RunConfig};
pub use parser::{parse, pretty_print, ParseError};
pub use table::{CellValue, Column, Table};

/// The scalar type cells and kernels are instantiated with.
pub type Real = f64;

/// A fitted imputation polynomial over [`Real`].
pub type Polynomial = numeric::Polynomial<Real>;
