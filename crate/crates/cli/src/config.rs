use std::fs;
use std::path::{Path, PathBuf};

use fragmenta::{LawDescriptor, SplitLaw};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Theory,
    Roots,
    Profile,
    Discrete,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Theory => "theory",
            Command::Roots => "roots",
            Command::Profile => "profile",
            Command::Discrete => "discrete",
            Command::Verify => "verify",
        }
    }
}

/// Everything a run depends on. Unused fields are ignored by commands that
/// do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawDescriptor>,
    #[serde(default = "default_x_c")]
    pub x_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Exact step count for `simulate`; runs stop at the cutoff otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<u8>,
}

fn default_x_c() -> f64 {
    1e-3
}
fn default_seed() -> u64 {
    7
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("fragmenta-out")
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            law: None,
            x_c: default_x_c(),
            replicates: None,
            master_seed: default_seed(),
            output_dir: default_output_dir(),
            grid: None,
            steps: None,
            m: Vec::new(),
            n: None,
            y_min: None,
            stop_size: None,
            snapshots: Vec::new(),
            criteria: Vec::new(),
        }
    }

    /// Reads a config, or the `config` member of a run manifest.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let json_err = |source| CliError::Json {
            path: path.to_path_buf(),
            source,
        };
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(json_err)
    }

    pub fn replicates_or(&self, default: usize) -> usize {
        self.replicates.unwrap_or(default)
    }

    pub fn grid_or(&self, default: usize) -> usize {
        self.grid.unwrap_or(default)
    }

    pub fn law(&self) -> CliResult<Option<SplitLaw>> {
        self.law
            .clone()
            .map(|d| SplitLaw::try_from(d).map_err(|e| CliError::usage("law", e.to_string())))
            .transpose()
    }

    pub fn law_or(&self, default: SplitLaw) -> CliResult<SplitLaw> {
        Ok(self.law()?.unwrap_or(default))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.replicates == Some(0) {
            return Err(CliError::usage("replicates", "need at least one replicate"));
        }
        if self.grid == Some(0) {
            return Err(CliError::usage("grid", "need at least one grid point"));
        }
        let law = self.law()?;
        let continuous_command = matches!(self.command, Command::Simulate | Command::Verify);
        if continuous_command && !(self.x_c > 0.0 && self.x_c < 1.0) {
            return Err(CliError::usage(
                "x_c",
                format!("cutoff {} must lie in (0, 1)", self.x_c),
            ));
        }
        match (self.command, &law) {
            (Command::Simulate | Command::Theory | Command::Profile | Command::Verify, Some(l))
                if !l.is_continuous() =>
            {
                Err(CliError::usage(
                    "law",
                    format!("`{}` needs a continuous law, got {l}", self.command.name()),
                ))
            }
            (Command::Discrete, Some(l)) if l.is_continuous() => Err(CliError::usage(
                "law",
                format!("`discrete` needs heavy_tail or catalan, got {l}"),
            )),
            (Command::Roots, _) if self.m.iter().any(|&m| !(2..=40).contains(&m)) => {
                Err(CliError::usage("m", "arities must lie in 2..=40"))
            }
            _ => Ok(()),
        }
    }
}
