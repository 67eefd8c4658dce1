//! `rapidlearn` — plan, inject novelties, adapt, evaluate, and analyze.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rapidlearn_cli::{
    aggregate, emit_learning_curve, read_records, restore_into, run_scenario, welch_ttest,
    ExperimentConfig, RunRecord, StoredExecutor, RESULTS_HEADER,
};
use rapidlearn_core::bridge::{evaluate, StretchIPT};
use rapidlearn_core::discovery::TrainingLog;
use rapidlearn_core::learner::Strategy;
use rapidlearn_core::novelty::{catalogue, spec, NoveltyId};
use rapidlearn_core::planner::{plan, PlanError, SearchConfig};
use rapidlearn_core::symbolic::{parse_domain, parse_problem, validate_domain, GroundTask};

#[derive(Parser)]
#[command(name = "rapidlearn", version, about = "Crafting-gridworld adaptation agent")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan a PDDL task and print the ground operator sequence.
    ///
    /// Exits 0 when a plan is found, 1 when none exists, 2 on a search
    /// budget timeout.
    Plan {
        /// Domain file.
        #[arg(long)]
        domain: PathBuf,
        /// Problem file.
        #[arg(long)]
        problem: PathBuf,
        /// Search node budget.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Inspect the novelty catalogue.
    Novelties {
        #[command(subcommand)]
        cmd: NoveltiesCmd,
    },
    /// Adapt to a scenario across seeds and write result files.
    Run {
        /// Scenario id (as printed by `novelties list`) or `none`.
        #[arg(long)]
        scenario: String,
        /// Strategies to run (kge-ucb, kge-uab, eg), comma separated.
        #[arg(long, value_delimiter = ',', default_value = "kge-ucb,kge-uab,eg")]
        strategy: Vec<String>,
        /// Number of seeds (runs seeds 0..N).
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Output directory for results, logs, and executors.
        #[arg(long, env = "RAPIDLEARN_OUT_DIR")]
        out: PathBuf,
        /// Evaluation episodes per trial.
        #[arg(long, default_value_t = 100)]
        episodes: u32,
        /// Evaluation trials per adapted agent.
        #[arg(long, default_value_t = 10)]
        trials: u32,
    },
    /// Re-evaluate stored executors in their scenario.
    Eval {
        /// Executor file(s); repeat for multi-discovery scenarios, in
        /// training order.
        #[arg(long, required = true)]
        executor: Vec<PathBuf>,
        /// Evaluation episodes.
        #[arg(long, default_value_t = 100)]
        episodes: u32,
        /// Evaluation seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Aggregate result CSVs and compare strategies.
    Stats {
        /// Directory holding results-*.csv files.
        #[arg(long = "in")]
        in_dir: PathBuf,
    },
    /// Emit per-strategy learning curves from stored training logs.
    Curve {
        /// Directory holding logs-*.json files.
        #[arg(long = "in")]
        in_dir: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum NoveltiesCmd {
    /// List catalogued novelties.
    List,
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    match s {
        "kge-ucb" => Ok(Strategy::KgeUcb),
        "kge-uab" => Ok(Strategy::KgeUab),
        "eg" => Ok(Strategy::Eg),
        other => bail!("unknown strategy `{other}` (expected kge-ucb, kge-uab, or eg)"),
    }
}

fn parse_scenario(s: &str) -> Result<Option<NoveltyId>> {
    if s == "none" {
        return Ok(None);
    }
    Ok(Some(NoveltyId::parse(s).map_err(|e| anyhow::anyhow!("{e}"))?))
}

fn cmd_plan(domain: &Path, problem: &Path, budget: Option<usize>) -> Result<ExitCode> {
    let domain_src = std::fs::read_to_string(domain)
        .with_context(|| format!("reading {}", domain.display()))?;
    let problem_src = std::fs::read_to_string(problem)
        .with_context(|| format!("reading {}", problem.display()))?;
    let mut dom = parse_domain(&domain_src).map_err(|e| anyhow::anyhow!("domain: {e}"))?;
    validate_domain(&mut dom);
    let prob = parse_problem(&problem_src, &dom).map_err(|e| anyhow::anyhow!("problem: {e}"))?;
    let task = GroundTask::from_problem(&dom, &prob).map_err(|e| anyhow::anyhow!("ground: {e}"))?;
    let mut cfg = SearchConfig::default();
    if let Some(b) = budget {
        cfg.node_budget = b;
    }
    match plan(&task, &cfg) {
        Ok(p) => {
            for &op in &p.steps {
                println!("{}", task.operators[op].display_name());
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(PlanError::NoPlan) => {
            eprintln!("no plan");
            Ok(ExitCode::from(1))
        }
        Err(PlanError::Timeout) => {
            eprintln!("search budget exhausted");
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_run(
    scenario: &str,
    strategies: &[String],
    seeds: u64,
    out: &Path,
    episodes: u32,
    trials: u32,
) -> Result<ExitCode> {
    let scenario = parse_scenario(scenario)?;
    let strategies = strategies
        .iter()
        .map(|s| parse_strategy(s))
        .collect::<Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(scenario, strategies);
    cfg.seeds = (0..seeds).collect();
    cfg.eval_episodes = episodes;
    cfg.eval_trials = trials;
    cfg.out_dir = Some(out.to_path_buf());
    let outcome = run_scenario(&cfg)?;
    for r in &outcome.records {
        println!(
            "{} {} seed {}: adapt {} steps, converged {}, success {:.3} ({:.1}s)",
            r.scenario,
            r.strategy,
            r.seed,
            r.time_to_adapt,
            r.converged,
            r.post_novelty_success,
            r.wall_clock_s
        );
    }
    for f in &outcome.failures {
        eprintln!("{} seed {} failed: {}", f.strategy, f.seed, f.error);
    }
    println!(
        "{} records, {} failures → {}",
        outcome.records.len(),
        outcome.failures.len(),
        out.display()
    );
    Ok(if outcome.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_eval(executors: &[PathBuf], episodes: u32, seed: u64) -> Result<ExitCode> {
    let mut stored = Vec::new();
    for path in executors {
        let file = std::fs::File::open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let e: StoredExecutor = serde_json::from_reader(std::io::BufReader::new(file))
            .with_context(|| format!("decoding {}", path.display()))?;
        stored.push(e);
    }
    let scenario = parse_scenario(&stored[0].scenario)?;
    for e in &stored[1..] {
        if e.scenario != stored[0].scenario {
            bail!("executors span different scenarios");
        }
    }
    let novelty = scenario.map(spec);
    let mut ipt = StretchIPT::build(novelty.as_ref(), seed)
        .map_err(|e| anyhow::anyhow!("build: {e}"))?;
    for e in &stored {
        let restored = restore_into(e, &ipt).map_err(|err| anyhow::anyhow!("{err}"))?;
        ipt.registry.insert(restored);
    }
    let mut wins = 0u32;
    for episode in 0..episodes {
        let ev = evaluate(&mut ipt, seed.wrapping_add(u64::from(episode)))
            .map_err(|e| anyhow::anyhow!("evaluate: {e}"))?;
        wins += u32::from(ev.success);
    }
    println!(
        "{}: success {}/{} = {:.3}",
        stored[0].scenario,
        wins,
        episodes,
        f64::from(wins) / f64::from(episodes)
    );
    Ok(ExitCode::SUCCESS)
}

fn read_all_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    entries.sort();
    for path in entries {
        let file = std::fs::File::open(&path)?;
        match read_records(std::io::BufReader::new(file)) {
            Ok(mut r) => records.append(&mut r),
            // Not a results file (wrong header) — e.g. an emitted curve.
            Err(rapidlearn_cli::RecordsError::BadHeader) => continue,
            Err(e) => return Err(anyhow::anyhow!("{}: {e}", path.display())),
        }
    }
    Ok(records)
}

fn cmd_stats(in_dir: &Path) -> Result<ExitCode> {
    let records = read_all_records(in_dir)?;
    let rows = aggregate(&records).map_err(|e| anyhow::anyhow!("{e}"))?;
    println!("{RESULTS_HEADER}");
    println!(
        "{:<14} {:<8} {:>3}  {:>22}  {:>14}  {}",
        "scenario", "strategy", "n", "time-to-adapt (mean±SD)", "success", "unconverged"
    );
    for row in &rows {
        let tta = match row.time_to_adapt {
            Some((m, sd)) => format!("{m:.0} ± {sd:.0}"),
            None => "did not converge".to_string(),
        };
        let flag = if row.single_sample { " (single sample)" } else { "" };
        println!(
            "{:<14} {:<8} {:>3}  {:>22}  {:>6.3} ± {:<5.3}  {}{flag}",
            row.scenario,
            row.strategy,
            row.n,
            tta,
            row.success_mean,
            row.success_sd,
            row.did_not_converge
        );
    }

    // Pairwise strategy comparisons within each scenario, on evaluation
    // success and (where both sides have ≥2 converged runs) adaptation time.
    let mut scenarios: Vec<&str> = records.iter().map(|r| r.scenario.as_str()).collect();
    scenarios.sort_unstable();
    scenarios.dedup();
    for scenario in scenarios {
        let mut strategies: Vec<&str> = records
            .iter()
            .filter(|r| r.scenario == scenario)
            .map(|r| r.strategy.as_str())
            .collect();
        strategies.sort_unstable();
        strategies.dedup();
        for (i, sa) in strategies.iter().enumerate() {
            for sb in &strategies[i + 1..] {
                let pick = |s: &str, f: fn(&RunRecord) -> Option<f64>| -> Vec<f64> {
                    records
                        .iter()
                        .filter(|r| r.scenario == scenario && r.strategy == s)
                        .filter_map(f)
                        .collect()
                };
                let succ_a = pick(sa, |r| Some(r.post_novelty_success));
                let succ_b = pick(sb, |r| Some(r.post_novelty_success));
                if let Ok(w) = welch_ttest(&succ_a, &succ_b) {
                    println!(
                        "{scenario}: {sa} vs {sb} success t={:.3} df={:.1} p={:.4}",
                        w.t, w.df, w.p
                    );
                }
                let tta = |r: &RunRecord| r.converged.then_some(r.time_to_adapt as f64);
                let (ta, tb) = (pick(sa, tta), pick(sb, tta));
                if let Ok(w) = welch_ttest(&ta, &tb) {
                    println!(
                        "{scenario}: {sa} vs {sb} time-to-adapt t={:.3} df={:.1} p={:.4}",
                        w.t, w.df, w.p
                    );
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_curve(in_dir: &Path, out: &Path) -> Result<ExitCode> {
    let mut logs: Vec<TrainingLog> = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(in_dir)
        .with_context(|| format!("reading {}", in_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("logs-"))
        })
        .collect();
    entries.sort();
    for path in entries {
        let file = std::fs::File::open(&path)?;
        let mut batch: Vec<TrainingLog> =
            serde_json::from_reader(std::io::BufReader::new(file))
                .with_context(|| format!("decoding {}", path.display()))?;
        logs.append(&mut batch);
    }
    emit_learning_curve(&logs, out)?;
    println!("{} logs → {}", logs.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Plan { domain, problem, budget } => cmd_plan(domain, problem, *budget),
        Cmd::Novelties { cmd: NoveltiesCmd::List } => {
            for n in catalogue() {
                println!("{:<14} {}", n.id.as_str(), n.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { scenario, strategy, seeds, out, episodes, trials } => {
            cmd_run(scenario, strategy, *seeds, out, *episodes, *trials)
        }
        Cmd::Eval { executor, episodes, seed } => cmd_eval(executor, *episodes, *seed),
        Cmd::Stats { in_dir } => cmd_stats(in_dir),
        Cmd::Curve { in_dir, out } => cmd_curve(in_dir, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
