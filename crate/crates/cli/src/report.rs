use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use phimv_core::RunRecord;
use serde::{Deserialize, Serialize};

use crate::config::Format;

/// One table row. `t` holds the step size for ADR rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub case: String,
    pub t: f64,
    pub error: f64,
    pub bound: Option<f64>,
    /// Observed convergence order against the previous row (ADR only).
    pub order: Option<f64>,
    pub passed: bool,
    pub seconds: f64,
    pub s_effective: u64,
    pub series_len_s: usize,
    pub recovery_terms: usize,
    pub matvecs: usize,
}

impl ResultRow {
    pub fn new(experiment: &str, case: impl Into<String>, t: f64, error: f64, bound: Option<f64>) -> Self {
        let passed = bound.map_or(true, |b| error <= b);
        Self {
            experiment: experiment.to_owned(),
            case: case.into(),
            t,
            error,
            bound,
            order: None,
            passed,
            seconds: 0.0,
            s_effective: 0,
            series_len_s: 0,
            recovery_terms: 0,
            matvecs: 0,
        }
    }

    pub fn with_record(mut self, rec: &RunRecord) -> Self {
        self.s_effective = rec.s_effective;
        self.series_len_s = rec.series_len_s;
        self.recovery_terms = rec.series_lens_f.iter().sum();
        self.matvecs = rec.matvecs;
        self
    }

    pub fn with_seconds(mut self, seconds: f64) -> Self {
        self.seconds = seconds;
        self
    }
}

pub fn all_passed(rows: &[ResultRow]) -> bool {
    rows.iter().all(|r| r.passed)
}

fn write_to<W: Write>(rows: &[ResultRow], format: Format, w: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(w);
            for row in rows {
                wtr.serialize(row)?;
            }
            wtr.flush()?;
        }
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn write_rows(rows: &[ResultRow], path: Option<&Path>, format: Format) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_to(rows, format, f)
        }
        None => write_to(rows, format, io::stdout().lock()),
    }
}
