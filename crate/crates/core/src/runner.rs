//! Runs a program file through the configured pipeline.

use std::path::{Path, PathBuf};
use std::process::Command as Process;

use thiserror::Error;

use crate::ast::{validate_spec, Diagnostic, Spec};
use crate::codegen::{generate_script, script_path_for, write_script, CodegenError};
use crate::config::{ConfigError, Pipeline, RunConfig};
use crate::interpreter::{interpret, InterpretError, RunReport};
use crate::parser::{parse, ParseError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}:{source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {}", path.display(), .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { path: PathBuf, diagnostics: Vec<Diagnostic> },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Interpret(#[from] InterpretError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error("cannot start `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("generated script {} failed ({status}):\n{stderr}", script.display())]
    Script { script: PathBuf, status: String, stderr: String },
    #[error("generated script reported {} but it does not exist", .0.display())]
    MissingOutput(PathBuf),
}

impl RunError {
    /// 2 for programs that do not parse or validate, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse { .. } | RunError::Invalid { .. } => 2,
            RunError::Interpret(InterpretError::Invalid(_)) | RunError::Codegen(CodegenError::Invalid(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug)]
pub enum RunOutcome {
    Interpreted(RunReport),
    Compiled { script: PathBuf, outputs: Vec<PathBuf> },
}

impl RunOutcome {
    pub fn outputs(&self) -> &[PathBuf] {
        match self {
            RunOutcome::Interpreted(r) => &r.outputs,
            RunOutcome::Compiled { outputs, .. } => outputs,
        }
    }
}

/// Reads, parses and validates a program file.
pub fn load_spec(path: &Path) -> Result<Spec, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Read { path: path.to_path_buf(), source })?;
    let spec = parse(&text).map_err(|source| RunError::Parse { path: path.to_path_buf(), source })?;
    let diagnostics = validate_spec(&spec);
    if !diagnostics.is_empty() {
        return Err(RunError::Invalid { path: path.to_path_buf(), diagnostics });
    }
    Ok(spec)
}

fn label(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Writes the generated script for `spec_path` to `out` and returns it.
pub fn compile(spec_path: &Path, config: &RunConfig, out: Option<&Path>) -> Result<PathBuf, RunError> {
    let spec = load_spec(spec_path)?;
    let script = generate_script(&spec, config, &label(spec_path))?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| script_path_for(spec_path, &config.output_dir));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|source| CodegenError::Io { path: parent.to_path_buf(), source })?;
    }
    write_script(&script, &path)?;
    Ok(path)
}

/// Runs a generated script and returns the files it reports writing.
pub fn execute_script(script: &Path, config: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let argv = config.python_command();
    let command = argv.join(" ");
    let (program, args) = argv.split_first().ok_or_else(|| RunError::Spawn {
        command: command.clone(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty python command"),
    })?;
    let output = Process::new(program)
        .args(args)
        .arg(script)
        .output()
        .map_err(|source| RunError::Spawn { command: command.clone(), source })?;
    if !output.status.success() {
        return Err(RunError::Script {
            script: script.to_path_buf(),
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    let mut outputs = Vec::new();
    for line in stdout.lines() {
        if let Some(path) = line.strip_prefix("wrote ") {
            let path = PathBuf::from(path);
            if !path.exists() {
                return Err(RunError::MissingOutput(path));
            }
            outputs.push(path);
        }
    }
    Ok(outputs)
}

/// Runs the program at `spec_path` with the configured pipeline.
pub fn run(spec_path: &Path, config: &RunConfig) -> Result<RunOutcome, RunError> {
    match config.pipeline {
        Pipeline::Interpreter => {
            let spec = load_spec(spec_path)?;
            Ok(RunOutcome::Interpreted(interpret(&spec, config, &label(spec_path))?))
        }
        Pipeline::Compiler => {
            let script = compile(spec_path, config, None)?;
            let outputs = execute_script(&script, config)?;
            Ok(RunOutcome::Compiled { script, outputs })
        }
    }
}
