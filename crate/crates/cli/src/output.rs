use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
    Mm,
    Csv,
}

pub struct Artifact {
    pub name: String,
    pub format: Format,
    pub content: String,
}

impl Artifact {
    pub fn json(name: &str, value: &impl Serialize) -> Result<Self> {
        let mut content = serde_json::to_string_pretty(value)?;
        content.push('\n');
        Ok(Artifact { name: name.into(), format: Format::Json, content })
    }

    pub fn new(name: &str, format: Format, content: String) -> Self {
        Artifact { name: name.into(), format, content }
    }
}

/// A gate in a report: name, whether it can fail the run, verdict, detail.
#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    pub mandatory: bool,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match (self.passed, self.mandatory) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "differs (advisory)",
        };
        write!(f, "{:<38} {:<18} {}", self.name, verdict, self.detail)
    }
}

/// What a command produced. The first artifact is the primary one.
#[derive(Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub gates: Vec<Gate>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn gate(&mut self, name: &str, mandatory: bool, passed: bool, detail: impl Into<String>) {
        self.gates.push(Gate { name: name.into(), mandatory, passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed || !g.mandatory)
    }

    /// With an output directory, writes the selected artifacts and prints
    /// the summary to stdout. Without one, prints the primary artifact to
    /// stdout and the summary to stderr.
    pub fn emit(&self, out: Option<&Path>, formats: &[Format]) -> Result<()> {
        let summary: Vec<String> = self.notes.iter().cloned().chain(self.gates.iter().map(Gate::to_string)).collect();
        match out {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for a in self.artifacts.iter().filter(|a| formats.contains(&a.format)) {
                    let path = dir.join(&a.name);
                    fs::write(&path, &a.content).with_context(|| format!("writing {}", path.display()))?;
                }
                for line in summary {
                    println!("{line}");
                }
            }
            None => {
                if let Some(a) = self.artifacts.first() {
                    print!("{}", a.content);
                }
                for line in summary {
                    eprintln!("{line}");
                }
            }
        }
        Ok(())
    }
}
