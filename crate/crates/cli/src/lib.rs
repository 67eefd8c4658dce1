//! Experiment harness for the crafting-gridworld adaptation agent: seeded
//! experiment execution with per-seed isolation, CSV result records,
//! aggregation (mean ± sample SD), Welch's t-test, learning-curve emission,
//! executor save/load, world-config files, and step traces.
//!
//! The companion binary (`rapidlearn`) exposes these as subcommands; the
//! library keeps every operation callable (and testable) without a shell.

pub mod config;
pub mod curve;
pub mod experiment;
pub mod records;
pub mod stats;
pub mod store;
pub mod trace;

pub use config::{parse_world_config, ConfigError};
pub use curve::emit_learning_curve;
pub use experiment::{
    run_one, run_scenario, run_scenario_with, ExperimentConfig, ScenarioOutcome, SeedFailure,
};
pub use records::{read_records, write_records, RecordsError, RunRecord, RESULTS_HEADER};
pub use stats::{aggregate, welch_ttest, AggregateRow, DegenerateVariance, EmptyGroup, Welch};
pub use store::{restore_into, RestoreError, StoredExecutor};
pub use trace::{TraceError, TraceWriter};
