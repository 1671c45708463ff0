use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use phimv_core::params::{DEFAULT_DEGREE, DEFAULT_DELTA, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Chebyshev,
    Lowrank,
    Adr,
    Gallery,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Chebyshev => "chebyshev",
            Experiment::Lowrank => "lowrank",
            Experiment::Adr => "adr",
            Experiment::Gallery => "gallery",
        }
    }

    pub fn default_tol(&self) -> f64 {
        match self {
            Experiment::Adr => 1e-7,
            _ => DEFAULT_TOL,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chebyshev" => Ok(Experiment::Chebyshev),
            "lowrank" => Ok(Experiment::Lowrank),
            "adr" => Ok(Experiment::Adr),
            "gallery" => Ok(Experiment::Gallery),
            other => Err(format!("unknown experiment `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Settings for one experiment run. `Default`-valued fields reproduce the
/// desk-scale acceptance runs.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub experiment: Experiment,
    /// Problem size override: Chebyshev `N`, low-rank `n`, ADR points per side.
    pub size: Option<usize>,
    /// Combination order override.
    pub p: Option<usize>,
    /// Evaluator tolerance; `None` picks the experiment default.
    pub tol: Option<f64>,
    pub m: usize,
    pub delta: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Evaluate gallery matrices concurrently.
    pub parallel: bool,
    /// Add the slow table cells that carry no acceptance bound.
    pub full: bool,
}

impl BenchConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            size: None,
            p: None,
            tol: None,
            m: DEFAULT_DEGREE,
            delta: DEFAULT_DELTA,
            seed: 2025,
            out: None,
            format: Format::Csv,
            parallel: false,
            full: false,
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or_else(|| self.experiment.default_tol())
    }
}
