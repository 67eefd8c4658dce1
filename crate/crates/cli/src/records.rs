//! Result records and their CSV form.
//!
//! Every results file starts with a version comment line so analysis
//! scripts can detect schema drift. The wall-clock column is informational:
//! determinism guarantees cover every other column.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version line prepended to every results CSV.
pub const RESULTS_HEADER: &str = "# rapidlearn-results v1";

/// One adaptation run: a scenario, an exploration strategy, and a seed,
/// reduced to how long the agent took to adapt and how well it performs
/// afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Scenario id (`none` for the closed world).
    pub scenario: String,
    /// Exploration strategy name.
    pub strategy: String,
    /// Run seed (placement, training, and evaluation all derive from it).
    pub seed: u64,
    /// Training world-steps spent across discoveries.
    pub time_to_adapt: u64,
    /// Whether the run adapted fully (a pass succeeded and every discovery
    /// met the convergence test).
    pub converged: bool,
    /// Fraction of evaluation episodes that completed the task.
    pub post_novelty_success: f64,
    /// Informational wall-clock seconds (excluded from determinism checks).
    pub wall_clock_s: f64,
}

impl RunRecord {
    /// Bounds that hold for any well-formed record: the success fraction is
    /// a probability and training time cannot exceed the episode budget
    /// (`e_max` episodes of at most `horizon` steps per discovery).
    pub fn well_formed(&self, e_max: u64, horizon: u64, discoveries: u64) -> bool {
        (0.0..=1.0).contains(&self.post_novelty_success)
            && self.time_to_adapt <= e_max * horizon * discoveries.max(1)
    }
}

/// Errors reading a results CSV.
#[derive(Debug, Error)]
pub enum RecordsError {
    /// The file does not start with [`RESULTS_HEADER`].
    #[error("missing or unsupported results header (expected `{RESULTS_HEADER}`)")]
    BadHeader,
    /// Underlying IO failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// CSV decode failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Writes records as a version-headed CSV.
pub fn write_records(mut out: impl Write, records: &[RunRecord]) -> Result<(), RecordsError> {
    writeln!(out, "{RESULTS_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records from a version-headed CSV.
pub fn read_records(input: impl Read) -> Result<Vec<RunRecord>, RecordsError> {
    let mut lines = BufReader::new(input);
    let mut first = String::new();
    lines.read_line(&mut first)?;
    if first.trim_end() != RESULTS_HEADER {
        return Err(RecordsError::BadHeader);
    }
    let mut r = csv::Reader::from_reader(lines);
    let mut records = Vec::new();
    for row in r.deserialize() {
        records.push(row?);
    }
    Ok(records)
}
