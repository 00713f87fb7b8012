use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::args::{Cli, Command};
use crate::commands::CliError;

/// One entry of a `--runs-descriptor` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDescriptor {
    pub command: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
}

impl RunDescriptor {
    /// Re-parses the descriptor as command-line flags so validation is shared with
    /// the subcommands.
    pub fn to_command(&self) -> Result<Command, CliError> {
        let mut argv = vec!["exfree".to_string(), self.command.clone()];
        for (key, value) in &self.params {
            let flag = format!("--{key}");
            match value {
                Value::Bool(true) => argv.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::String(s) => argv.extend([flag, s.clone()]),
                Value::Number(n) => argv.extend([flag, n.to_string()]),
                Value::Array(items) => {
                    let joined: Vec<String> = items
                        .iter()
                        .map(|v| match v {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    argv.extend([flag, joined.join(",")]);
                }
                Value::Object(_) => argv.extend([flag, value.to_string()]),
            }
        }
        match (self.format.as_deref(), self.command.as_str()) {
            (None, _) | (Some("json"), "sweep") | (Some("csv"), "sweep") => {
                if let Some(f) = &self.format {
                    argv.extend(["--format".into(), f.clone()]);
                }
            }
            (Some("json"), _) => {}
            (Some(f), cmd) => {
                return Err(CliError::Validation(format!("format {f:?} is not available for {cmd}")));
            }
        }
        let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Validation(e.to_string()))?;
        cli.command
            .ok_or_else(|| CliError::Validation(format!("descriptor names no command: {argv:?}")))
    }
}

/// Reads a single descriptor object or an array of them.
pub fn load(path: &Path) -> Result<Vec<RunDescriptor>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    let items = match value {
        Value::Array(items) => items,
        single => vec![single],
    };
    items
        .into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| CliError::Validation(format!("bad run descriptor: {e}"))))
        .collect()
}
