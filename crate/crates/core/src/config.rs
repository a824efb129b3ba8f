//! Run configuration, read from a YAML file next to the programs.
//!
//! ```yaml
//! input_dir: data/raw
//! output_dir: data/clean
//! python_cmd: python3
//! pipeline: compiler   # or: interpreter
//! ```
//!
//! Relative directories resolve against the directory holding the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_CONFIG_NAME: &str = "config.yaml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Compiler,
    Interpreter,
}

impl Pipeline {
    pub const ALLOWED: &'static str = "compiler, interpreter";
}

impl FromStr for Pipeline {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compiler" => Ok(Pipeline::Compiler),
            "interpreter" => Ok(Pipeline::Interpreter),
            other => Err(ConfigError::UnknownPipeline(other.to_string())),
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Compiler => "compiler",
            Pipeline::Interpreter => "interpreter",
        })
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid YAML in {}: {source}", path.display())]
    Yaml { path: PathBuf, source: serde_yaml::Error },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown pipeline '{0}' (allowed: {allowed})", allowed = Pipeline::ALLOWED)]
    UnknownPipeline(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Command line that invokes Python; only the compiler pipeline needs it.
    pub python_cmd: Option<String>,
    pub pipeline: Pipeline,
}

#[derive(Deserialize)]
struct RawConfig {
    input_dir: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    python_cmd: Option<String>,
    pipeline: Option<String>,
}

impl RunConfig {
    pub fn new(input_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, pipeline: Pipeline) -> Self {
        RunConfig { input_dir: input_dir.into(), output_dir: output_dir.into(), python_cmd: None, pipeline }
    }

    pub fn with_python(mut self, cmd: impl Into<String>) -> Self {
        self.python_cmd = Some(cmd.into());
        self
    }

    /// Parses YAML text; relative paths resolve against `base`.
    pub fn from_yaml(text: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_yaml::from_str(text)
            .map_err(|source| ConfigError::Yaml { path: origin.to_path_buf(), source })?;
        let pipeline: Pipeline = raw.pipeline.ok_or(ConfigError::MissingKey("pipeline"))?.parse()?;
        let input_dir = raw.input_dir.ok_or(ConfigError::MissingKey("input_dir"))?;
        let output_dir = raw.output_dir.ok_or(ConfigError::MissingKey("output_dir"))?;
        let python_cmd = raw.python_cmd.filter(|c| !c.trim().is_empty());
        if pipeline == Pipeline::Compiler && python_cmd.is_none() {
            return Err(ConfigError::MissingKey("python_cmd"));
        }
        Ok(RunConfig { input_dir: base.join(input_dir), output_dir: base.join(output_dir), python_cmd, pipeline })
    }

    /// The Python command split into program and arguments.
    pub fn python_command(&self) -> Vec<String> {
        self.python_cmd.as_deref().unwrap_or("python3").split_whitespace().map(str::to_string).collect()
    }

    pub fn resolve_input(&self, source: &str) -> PathBuf {
        self.input_dir.join(source)
    }

    pub fn resolve_output(&self, target: &str) -> PathBuf {
        self.output_dir.join(target)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    RunConfig::from_yaml(&text, base, path)
}

/// `config.yaml` in the directory of the given program.
pub fn default_config_path(spec_path: &Path) -> PathBuf {
    spec_path.parent().unwrap_or(Path::new(".")).join(DEFAULT_CONFIG_NAME)
}
