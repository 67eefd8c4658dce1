//! Learning-curve emission: per-strategy rolling success over training
//! timesteps, as a version-headed CSV.

use std::io::Write;
use std::path::Path;

use rapidlearn_core::discovery::TrainingLog;

use crate::records::RESULTS_HEADER;

/// Episodes in the rolling success window.
const WINDOW: usize = 100;

/// Writes one CSV row per training episode: the strategy, the cumulative
/// training timestep at the episode's end, and the mean success over the
/// trailing window. Logs sharing a strategy concatenate in input order
/// (multi-discovery runs chain their logs), so each strategy's series is a
/// single curve on a shared timestep axis.
pub fn emit_learning_curve(logs: &[TrainingLog], path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{RESULTS_HEADER}")?;
    writeln!(out, "strategy,timestep,rolling_success")?;

    let mut strategies: Vec<&str> = logs.iter().map(|l| l.strategy.as_str()).collect();
    strategies.sort_unstable();
    strategies.dedup();

    for strategy in strategies {
        let mut timestep: u64 = 0;
        let mut window: Vec<bool> = Vec::new();
        for log in logs.iter().filter(|l| l.strategy.as_str() == strategy) {
            for ep in &log.episodes {
                timestep += ep.steps;
                window.push(ep.success);
                let tail = &window[window.len().saturating_sub(WINDOW)..];
                let rolling =
                    tail.iter().filter(|s| **s).count() as f64 / tail.len() as f64;
                writeln!(out, "{strategy},{timestep},{rolling}")?;
            }
        }
    }
    out.flush()
}
