//! Run configuration: built-in defaults, then a flat TOML file, then flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub precision: u32,
    pub search_cap: u64,
    pub depth: usize,
    pub breadth: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub digits: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: 128,
            search_cap: 10_000_000,
            depth: 2,
            breadth: 6,
            seed: 1,
            out: PathBuf::from("results"),
            digits: 12,
        }
    }
}

/// One layer of settings; `None` leaves the layer below in place.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub search_cap: Option<u64>,
    pub depth: Option<usize>,
    pub breadth: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub digits: Option<usize>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Overrides, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// `self` on top of `below`.
    pub fn over(self, below: Overrides) -> Overrides {
        Overrides {
            precision: self.precision.or(below.precision),
            search_cap: self.search_cap.or(below.search_cap),
            depth: self.depth.or(below.depth),
            breadth: self.breadth.or(below.breadth),
            seed: self.seed.or(below.seed),
            out: self.out.or(below.out),
            digits: self.digits.or(below.digits),
        }
    }
}

/// The resolved configuration, and which of its settings were given
/// explicitly (experiments keep their own defaults for the rest).
pub fn resolve(layers: Overrides) -> Result<(RunConfig, Overrides), CliError> {
    let d = RunConfig::default();
    let c = RunConfig {
        precision: layers.precision.unwrap_or(d.precision),
        search_cap: layers.search_cap.unwrap_or(d.search_cap),
        depth: layers.depth.unwrap_or(d.depth),
        breadth: layers.breadth.unwrap_or(d.breadth),
        seed: layers.seed.unwrap_or(d.seed),
        out: layers.out.clone().unwrap_or(d.out),
        digits: layers.digits.unwrap_or(d.digits),
    };
    for (name, v) in [
        ("precision", c.precision as u64),
        ("search_cap", c.search_cap),
        ("depth", c.depth as u64),
        ("breadth", c.breadth as u64),
        ("digits", c.digits as u64),
    ] {
        if v == 0 {
            return Err(CliError::Usage(format!("{name} must be positive")));
        }
    }
    Ok((c, layers))
}
