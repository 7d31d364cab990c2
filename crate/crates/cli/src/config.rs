//! Run configuration: defaults, then a key=value file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hirzfloor::enumerate::EnumerationBudget;

pub const CONFIG_ENV: &str = "HIRZFLOOR_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Jsonl,
    Latex,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "jsonl" => Ok(Format::Jsonl),
            "latex" => Ok(Format::Latex),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Jsonl => "jsonl",
            Format::Latex => "latex",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub box_bound: u64,
    pub budget: EnumerationBudget,
    pub format: Format,
    /// `None` writes to standard output; `-` and the empty string mean `None`.
    pub output: Option<PathBuf>,
    /// `0` uses every available core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            box_bound: 12,
            budget: EnumerationBudget::default(),
            format: Format::Text,
            output: None,
            workers: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value {value:?} for {key}"))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = parse_value(key, value)?,
            "box_bound" => self.box_bound = parse_value(key, value)?,
            "max_templates" => self.budget.max_templates = parse_value(key, value)?,
            "max_lattice_points" => self.budget.max_lattice_points = parse_value(key, value)?,
            "format" => self.format = value.parse()?,
            "output" => self.output = (!value.is_empty() && value != "-").then(|| PathBuf::from(value)),
            "workers" => self.workers = parse_value(key, value)?,
            _ => return Err(format!("unknown config key {key:?}")),
        }
        Ok(())
    }

    /// Reads a file of `key = value` lines; `#` starts a comment.
    pub fn load_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        self.load_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn load_str(&mut self, text: &str) -> Result<(), String> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            self.set(key.trim(), value.trim()).map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.box_bound == 0 {
            return Err("box_bound must be positive".into());
        }
        EnumerationBudget::new(self.budget.max_templates, self.budget.max_lattice_points)
            .map(|_| ())
            .map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_files() {
        let mut c = RunConfig::default();
        c.load_str("# run settings\nseed = 11\nformat=json  # inline\n\nmax_templates = 500\n").unwrap();
        assert_eq!(c.seed, 11);
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.budget.max_templates, 500);
        assert_eq!(c.box_bound, 12);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.load_str("colour = red").is_err());
        assert!(c.load_str("seed = -1").is_err());
        assert!(c.load_str("seed").is_err());
    }
}
