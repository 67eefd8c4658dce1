//! Seeded experiment execution: adapt, evaluate, record — with per-seed
//! isolation so one bad run cannot take down a batch.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rapidlearn_core::bridge::{evaluate, rapid_learn, StretchIPT};
use rapidlearn_core::discovery::{DiscoveryConfig, TrainingLog};
use rapidlearn_core::learner::Strategy;
use rapidlearn_core::novelty::{spec, NoveltyId};
use rapidlearn_core::util::fnv1a64;
use thiserror::Error;

use crate::records::{write_records, RecordsError, RunRecord};
use crate::store::StoredExecutor;

/// A batch of adaptation runs over one scenario.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Scenario to inject; `None` runs the closed world.
    pub scenario: Option<NoveltyId>,
    /// Strategies to run (each gets every seed).
    pub strategies: Vec<Strategy>,
    /// Run seeds; every source of randomness derives from these.
    pub seeds: Vec<u64>,
    /// Evaluation episodes per trial.
    pub eval_episodes: u32,
    /// Independent evaluation trials per adapted agent.
    pub eval_trials: u32,
    /// Discovery/learner parameter overrides.
    pub discovery: DiscoveryConfig,
    /// Where result files land; `None` keeps everything in memory.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A default batch for one scenario: ten seeds, 100-episode evaluation
    /// in ten trials, reference discovery parameters, no output directory.
    pub fn new(scenario: Option<NoveltyId>, strategies: Vec<Strategy>) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            strategies,
            seeds: (0..10).collect(),
            eval_episodes: 100,
            eval_trials: 10,
            discovery: DiscoveryConfig::default(),
            out_dir: None,
        }
    }

    /// Scenario id as recorded in result files.
    pub fn scenario_id(&self) -> String {
        self.scenario.map(|s| s.as_str().to_string()).unwrap_or_else(|| "none".into())
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.seeds.is_empty() {
            return Err(ExperimentError::Invalid("at least one seed required"));
        }
        if self.eval_episodes == 0 || self.eval_trials == 0 {
            return Err(ExperimentError::Invalid(
                "at least one evaluation episode and trial required",
            ));
        }
        if self.strategies.is_empty() {
            return Err(ExperimentError::Invalid("at least one strategy required"));
        }
        Ok(())
    }
}

/// Batch-level failures (individual seeds failing is not one).
#[derive(Debug, Error)]
pub enum ExperimentError {
    /// The configuration cannot be run at all.
    #[error("invalid experiment config: {0}")]
    Invalid(&'static str),
    /// Result files could not be written.
    #[error("writing results: {0}")]
    Write(#[from] RecordsError),
    /// Auxiliary output (logs, executors) could not be written.
    #[error("writing outputs: {0}")]
    Io(#[from] std::io::Error),
}

/// One seed's outcome inside a batch.
#[derive(Debug, Clone)]
pub struct SeedFailure {
    /// Strategy of the failed run.
    pub strategy: String,
    /// Seed of the failed run.
    pub seed: u64,
    /// Human-readable cause (run error or caught panic).
    pub error: String,
}

/// Everything a batch produced.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOutcome {
    /// Records of the seeds that completed.
    pub records: Vec<RunRecord>,
    /// Training logs parallel to `records` (one list per completed run).
    pub logs: Vec<Vec<TrainingLog>>,
    /// Stored executors parallel to `records`.
    pub executors: Vec<Vec<StoredExecutor>>,
    /// Seeds that errored or panicked; they do not abort the others.
    pub failures: Vec<SeedFailure>,
}

/// Evaluation placement seed for one (run, trial, episode) triple.
fn eval_seed(seed: u64, trial: u32, episode: u32) -> u64 {
    let mut bytes = [0u8; 20];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..12].copy_from_slice(&trial.to_le_bytes());
    bytes[12..16].copy_from_slice(&episode.to_le_bytes());
    bytes[16..].copy_from_slice(b"eval");
    fnv1a64(&bytes)
}

/// Runs one (scenario, strategy, seed) cell: build, adapt, evaluate.
///
/// Returns the record, the per-discovery training logs, and the learned
/// executors in storable form.
pub fn run_one(
    scenario: Option<NoveltyId>,
    strategy: Strategy,
    seed: u64,
    cfg: &DiscoveryConfig,
    eval_episodes: u32,
    eval_trials: u32,
) -> Result<(RunRecord, Vec<TrainingLog>, Vec<StoredExecutor>), String> {
    let started = Instant::now();
    let novelty = scenario.map(spec);
    let scenario_name =
        scenario.map(|s| s.as_str().to_string()).unwrap_or_else(|| "none".into());

    let mut ipt =
        StretchIPT::build(novelty.as_ref(), seed).map_err(|e| format!("build: {e}"))?;
    let report = rapid_learn(&mut ipt, strategy, cfg, seed).map_err(|e| format!("adapt: {e}"))?;

    let mut wins: u64 = 0;
    for trial in 0..eval_trials {
        for episode in 0..eval_episodes {
            let ev = evaluate(&mut ipt, eval_seed(seed, trial, episode))
                .map_err(|e| format!("evaluate: {e}"))?;
            wins += u64::from(ev.success);
        }
    }
    let episodes_total = u64::from(eval_trials) * u64::from(eval_episodes);

    let executors = ipt
        .registry
        .iter()
        .map(|e| StoredExecutor::from_executor(e, &ipt, &scenario_name))
        .collect();
    let record = RunRecord {
        scenario: scenario_name,
        strategy: strategy.as_str().to_string(),
        seed,
        time_to_adapt: report.adaptation_steps,
        converged: report.success && report.unconverged == 0,
        post_novelty_success: wins as f64 / episodes_total as f64,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    Ok((record, report.logs, executors))
}

/// Runs a whole batch with the default runner, writing result files when an
/// output directory is configured.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ScenarioOutcome, ExperimentError> {
    let outcome = run_scenario_with(cfg, |strategy, seed| {
        run_one(cfg.scenario, strategy, seed, &cfg.discovery, cfg.eval_episodes, cfg.eval_trials)
    })?;
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        let scenario = cfg.scenario_id();
        let file = std::fs::File::create(dir.join(format!("results-{scenario}.csv")))?;
        write_records(std::io::BufWriter::new(file), &outcome.records)?;
        for (record, logs) in outcome.records.iter().zip(&outcome.logs) {
            let name = format!("logs-{scenario}-{}-{}.json", record.strategy, record.seed);
            let file = std::fs::File::create(dir.join(name))?;
            serde_json::to_writer(std::io::BufWriter::new(file), logs)
                .map_err(std::io::Error::from)?;
        }
        for (record, stored) in outcome.records.iter().zip(&outcome.executors) {
            for (i, ex) in stored.iter().enumerate() {
                let name = format!(
                    "executor-{scenario}-{}-{}-{i}.json",
                    record.strategy, record.seed
                );
                let file = std::fs::File::create(dir.join(name))?;
                serde_json::to_writer_pretty(std::io::BufWriter::new(file), ex)
                    .map_err(std::io::Error::from)?;
            }
        }
    }
    Ok(outcome)
}

/// Batch driver with a pluggable per-cell runner (tests inject failures
/// through it). A runner panic or error is caught and recorded; remaining
/// cells still run.
pub fn run_scenario_with<F>(
    cfg: &ExperimentConfig,
    runner: F,
) -> Result<ScenarioOutcome, ExperimentError>
where
    F: Fn(Strategy, u64) -> Result<(RunRecord, Vec<TrainingLog>, Vec<StoredExecutor>), String>,
{
    cfg.validate()?;
    let mut outcome = ScenarioOutcome::default();
    for &strategy in &cfg.strategies {
        for &seed in &cfg.seeds {
            match catch_unwind(AssertUnwindSafe(|| runner(strategy, seed))) {
                Ok(Ok((record, logs, executors))) => {
                    outcome.records.push(record);
                    outcome.logs.push(logs);
                    outcome.executors.push(executors);
                }
                Ok(Err(error)) => outcome.failures.push(SeedFailure {
                    strategy: strategy.as_str().to_string(),
                    seed,
                    error,
                }),
                Err(panic) => {
                    let error = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "opaque panic".into());
                    outcome.failures.push(SeedFailure {
                        strategy: strategy.as_str().to_string(),
                        seed,
                        error: format!("panic: {error}"),
                    });
                }
            }
        }
    }
    Ok(outcome)
}
