//! Executor discovery: when a plan operator's effects stop materializing,
//! train a policy that drives the world back to a plannable state.
//!
//! The terminal set is derived from the plan itself: the failed operator's
//! own effect clause, plus the effect clause of every later plan operator
//! whose precondition consumes something the failed operator was supposed to
//! produce. Reaching any of those — in a state the planner can still solve —
//! ends an episode with the success reward; reaching one in a dead state
//! earns the failure penalty; everything else costs a step.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bridge::{
    realize_operator, AgentAction, EffectClause, ExecError, Executor, Realization, RunError,
    StretchIPT,
};
use crate::learner::{
    decayed, select_action, update_network, EpisodeBuffer, ExplorationState, LearnerConfig,
    PolicyNet, Strategy, Transition,
};
use crate::planner::{Plan, Plannability};
use crate::symbolic::GroundTask;
use crate::world::{base_actions, Action};

/// Discovery-phase parameters (defaults match the reference configuration).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    /// Terminal reward for reaching a plannable terminal state.
    pub phi1: f64,
    /// Terminal penalty for reaching a terminal state the planner cannot
    /// solve.
    pub phi2: f64,
    /// Episode budget per discovery.
    pub e_max: u64,
    /// Episodes between policy updates.
    pub update_rate: u64,
    /// Convergence: required mean episode return over the last `upsilon`
    /// episodes.
    pub delta_r: f64,
    /// Convergence: guard window added to `eta` for the rate-stability test.
    pub delta_g: usize,
    /// Convergence: required successes in the last `upsilon` episodes.
    pub eta: usize,
    /// Convergence: trailing window for success counting and mean return.
    pub upsilon: usize,
    /// Plan-execute-recover passes before giving up on a scenario.
    pub max_passes: u32,
    /// Policy and exploration hyperparameters.
    pub learner: LearnerConfig,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            phi1: 1000.0,
            phi2: -350.0,
            e_max: 100_000,
            update_rate: 10,
            delta_r: 900.0,
            delta_g: 100,
            eta: 96,
            upsilon: 100,
            max_passes: 12,
            learner: LearnerConfig::default(),
        }
    }
}

/// Error from [`plannable_states`]: the requested position is outside the
/// plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorNotInPlan {
    /// Requested plan position.
    pub at: usize,
    /// Plan length.
    pub plan_len: usize,
}

impl core::fmt::Display for OperatorNotInPlan {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "plan position {} is out of range for a {}-step plan", self.at, self.plan_len)
    }
}

/// The terminal clause set for recovering the plan operator at `at`.
///
/// Always contains the failed operator's own effect clause. A later plan
/// operator contributes its effect clause too when its numeric precondition
/// bounds a fluent the failed operator increases — the recovery may
/// legitimately skip ahead and hand the planner that state instead.
/// Duplicate clauses collapse.
pub fn plannable_states(
    task: &GroundTask,
    plan: &Plan,
    at: usize,
) -> Result<Vec<EffectClause>, OperatorNotInPlan> {
    if at >= plan.steps.len() {
        return Err(OperatorNotInPlan { at, plan_len: plan.steps.len() });
    }
    let target = &task.operators[plan.steps[at]];
    let mut clauses = alloc::vec![EffectClause::of_operator(target)];
    for &op_id in &plan.steps[at + 1..] {
        let op = &task.operators[op_id];
        let qualifies = target
            .increases
            .iter()
            .any(|(f, _)| op.pre_num.iter().any(|(g, _)| g == f));
        if qualifies {
            let clause = EffectClause::of_operator(op);
            if !clauses.contains(&clause) {
                clauses.push(clause);
            }
        }
    }
    Ok(clauses)
}

/// Checks the terminal condition in the current world state: if some clause
/// holds, the episode is over — with `phi1`/success when the state is still
/// plannable, `phi2`/failure otherwise (a planner timeout counts as not
/// plannable; the scenario's `planner_unknowns` counter records it).
pub fn terminal_check(
    ipt: &mut StretchIPT,
    clauses: &[EffectClause],
    cfg: &DiscoveryConfig,
) -> Option<(f64, bool)> {
    let s = ipt.detect();
    if !clauses.iter().any(|c| c.matches(&s)) {
        return None;
    }
    match ipt.plannable(&s) {
        Plannability::Plannable => Some((cfg.phi1, true)),
        Plannability::Unplannable | Plannability::Unknown => Some((cfg.phi2, false)),
    }
}

/// Resets to a fresh placement and replays the plan up to (and including)
/// the first *failing* attempt of the target operator, leaving the world in
/// the post-failure state an executor trains from.
///
/// The walk uses the same semantics as a live pass: precondition-gated while
/// fresh, effect-checked after any learned executor has substituted. Failure
/// of a different operator without a registered stand-in, or a walk in which
/// the target never fails, errors — one placement gave no training context.
/// Stand-in rollouts are stochastic, so callers retry such errors on fresh
/// placements before treating them as defects.
pub fn reach_failed_operator(
    ipt: &mut StretchIPT,
    target: &str,
    seed: u64,
) -> Result<(), RunError> {
    ipt.reset(seed)?;
    // Prefix executor substitutions sample their policies; keep the stream
    // tied to the placement seed so the walk stays reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let s = ipt.detect();
    let plan = ipt.plan_from_state(&s).map_err(RunError::ReachPlanningFailed)?;
    let mut pristine = true;
    for &op_id in &plan.steps {
        let name = ipt.task.operators[op_id].display_name();
        let outcome = if pristine {
            ipt.execute_operator(op_id)?
        } else {
            ipt.attempt_operator(op_id)?
        };
        if outcome.success {
            continue;
        }
        if name == target {
            return Ok(());
        }
        match ipt.registry.get(&name) {
            Some(_) => {
                let run = ipt.run_executor_by_name(&name, &mut rng)?;
                if !run.recovered {
                    return Err(RunError::PrefixExecutionFailed { operator: name });
                }
                pristine = false;
            }
            None => return Err(RunError::PrefixExecutionFailed { operator: name }),
        }
    }
    Err(RunError::TargetNeverFailed { operator: target.to_string() })
}

/// Guided curriculum step: navigate to a uniformly chosen novel entity,
/// recording each primitive as a −1-reward transition so the policy sees
/// approach behaviour early. Unroutable targets skip silently.
pub fn run_curriculum(
    ipt: &mut StretchIPT,
    actions: &[AgentAction],
    transitions: &mut Vec<Transition>,
    rng: &mut impl Rng,
) {
    let kinds = ipt.novel_entities();
    if kinds.is_empty() {
        return;
    }
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let route = match ipt.world.approach_route(kind) {
        Ok(r) => r,
        Err(_) => return,
    };
    for a in route {
        let Some(idx) = actions.iter().position(|x| *x == AgentAction::Primitive(a)) else {
            return;
        };
        let obs = ipt.world.observe();
        if ipt.world.step(a).is_err() {
            return;
        }
        transitions.push(Transition { obs, action: idx, reward: -1.0, done: false });
    }
    // A floating target is only reached once the agent stands on it: finish
    // with the pickup step when the route ends facing the item.
    if ipt.world.facing_item() == Some(kind) {
        let fwd = AgentAction::Primitive(Action::MoveForward);
        let Some(idx) = actions.iter().position(|x| *x == fwd) else {
            return;
        };
        let obs = ipt.world.observe();
        if ipt.world.step(Action::MoveForward).is_err() {
            return;
        }
        transitions.push(Transition { obs, action: idx, reward: -1.0, done: false });
    }
}

/// One training episode's outcome.
struct EpisodeRun {
    success: bool,
    ret: f64,
    transitions: Vec<Transition>,
}

/// Runs one training episode from the already-positioned world.
#[allow(clippy::too_many_arguments)]
fn run_episode(
    ipt: &mut StretchIPT,
    clauses: &[EffectClause],
    actions: &[AgentAction],
    policy: &PolicyNet,
    expl: &mut ExplorationState,
    rho: f64,
    cfg: &DiscoveryConfig,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeRun, RunError> {
    let mut transitions: Vec<Transition> = Vec::new();
    expl.begin_episode();

    // Zero-step recovery: the post-failure state may already be terminal.
    if let Some((reward, success)) = terminal_check(ipt, clauses, cfg) {
        return Ok(EpisodeRun { success, ret: reward, transitions });
    }

    // Strategies with environment knowledge occasionally start by walking to
    // a novel entity.
    if expl.strategy != Strategy::Eg && rng.gen_range(0.0..1.0) < rho {
        run_curriculum(ipt, actions, &mut transitions, rng);
    }

    let failure = |mut transitions: Vec<Transition>| {
        if let Some(last) = transitions.last_mut() {
            last.done = true;
        }
        let ret = transitions.iter().map(|t| t.reward).sum();
        EpisodeRun { success: false, ret, transitions }
    };

    // Decisions are bounded by the horizon: every world step consumes time,
    // and the cap also stops policies wedged on zero-step choices (such as a
    // learned sub-executor whose own termination condition already holds).
    for _ in 0..ipt.world.config().horizon {
        if ipt.world.episode_over() {
            return Ok(failure(transitions));
        }
        let obs = ipt.world.observe();
        let probs = policy.probs(&obs).map_err(|_| {
            RunError::Exec(ExecError::Unrealizable { operator: String::from("policy") })
        })?;
        let choice = select_action(&probs, expl, &cfg.learner, rng);
        let steps = match ipt.execute_agent_action(&actions[choice], rng) {
            Ok(n) => n,
            Err(ExecError::EpisodeOver) => {
                transitions.push(Transition { obs, action: choice, reward: -1.0, done: true });
                let ret = transitions.iter().map(|t| t.reward).sum();
                return Ok(EpisodeRun { success: false, ret, transitions });
            }
            Err(e) => return Err(e.into()),
        };
        if let Some((reward, success)) = terminal_check(ipt, clauses, cfg) {
            transitions.push(Transition { obs, action: choice, reward, done: true });
            let ret = transitions.iter().map(|t| t.reward).sum();
            return Ok(EpisodeRun { success, ret, transitions });
        }
        let reward = -(steps as f64);
        if ipt.world.episode_over() {
            transitions.push(Transition { obs, action: choice, reward, done: true });
            let ret = transitions.iter().map(|t| t.reward).sum();
            return Ok(EpisodeRun { success: false, ret, transitions });
        }
        transitions.push(Transition { obs, action: choice, reward, done: false });
    }
    Ok(failure(transitions))
}

/// The three-part convergence test over the episode history:
/// enough successes in the trailing `upsilon` window, a high enough mean
/// return there, and a success rate that has stopped moving (the rate over
/// the last `eta + delta_g` episodes equals the rate over the last `eta`,
/// compared exactly by cross-multiplication).
pub fn converged(successes: &[bool], returns: &[f64], cfg: &DiscoveryConfig) -> bool {
    let n = successes.len();
    let long_window = cfg.eta + cfg.delta_g;
    if n < long_window || n < cfg.upsilon {
        return false;
    }
    let wins_in_last = |k: usize| successes[n - k..].iter().filter(|s| **s).count();
    if wins_in_last(cfg.upsilon) < cfg.eta {
        return false;
    }
    let mean: f64 = returns[n - cfg.upsilon..].iter().sum::<f64>() / cfg.upsilon as f64;
    if mean < cfg.delta_r {
        return false;
    }
    let short = wins_in_last(cfg.eta) as u64;
    let long = wins_in_last(long_window) as u64;
    long * cfg.eta as u64 == short * long_window as u64
}

/// One episode's summary in a training log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// Zero-based episode index.
    pub episode: u64,
    /// World steps consumed after the reach prefix (counts toward
    /// time-to-adapt).
    pub steps: u64,
    /// Episode return.
    pub ret: f64,
    /// Whether the episode ended in a plannable terminal state.
    pub success: bool,
    /// Exploration probability in force.
    pub epsilon: f64,
    /// Curriculum probability in force.
    pub rho: f64,
}

/// Full per-episode record of one discovery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Operator the executor recovers.
    pub operator: String,
    /// Exploration strategy used.
    pub strategy: Strategy,
    /// Episode-by-episode history.
    pub episodes: Vec<EpisodeRecord>,
}

/// Derives the placement seed for one training episode.
fn episode_seed(seed: u64, episode: u64) -> u64 {
    let mut bytes = [0u8; 16];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..].copy_from_slice(&episode.to_le_bytes());
    crate::util::fnv1a64(&bytes)
}

/// Placement seed for one reach attempt; attempt 0 is the episode's own
/// seed, retries hash again so their placements stay disjoint from every
/// other episode's.
fn reach_seed(seed: u64, episode: u64, attempt: u64) -> u64 {
    let base = episode_seed(seed, episode);
    if attempt == 0 {
        base
    } else {
        episode_seed(base, attempt)
    }
}

/// Reach failures that depend on the placement or on sampled stand-in
/// behaviour rather than on the model: no route left to a navigation target
/// (a stand-in's rollout may have consumed it), the horizon spent before the
/// target, a stand-in that happened not to recover, or a target repaired as
/// a side effect of an upstream recovery. A fresh placement may still work.
fn reach_retryable(err: &RunError) -> bool {
    matches!(
        err,
        RunError::Exec(ExecError::RouteFailed | ExecError::EpisodeOver)
            | RunError::PrefixExecutionFailed { .. }
            | RunError::TargetNeverFailed { .. }
    )
}

/// Fresh placements tried per episode before declaring the training context
/// unreachable.
const REACH_ATTEMPTS: u64 = 32;

/// Trains an executor for the failed operator at plan position `at`.
///
/// Each episode resets to a fresh placement, replays the plan to the
/// failure, then rolls the policy out until a terminal clause fires or the
/// horizon ends. The policy updates every `update_rate` episodes; training
/// stops at convergence or the episode budget. If the budget runs out, the
/// snapshot with the best trailing success window is kept and the executor
/// is flagged unconverged.
pub fn discover_executor(
    ipt: &mut StretchIPT,
    plan: &Plan,
    at: usize,
    strategy: Strategy,
    cfg: &DiscoveryConfig,
    seed: u64,
) -> Result<(Executor, TrainingLog), RunError> {
    let clauses = plannable_states(&ipt.task, plan, at)
        .map_err(|e| RunError::OperatorNotInPlan { at: e.at, plan_len: e.plan_len })?;
    let op = ipt.task.operators[plan.steps[at]].clone();
    let target = op.display_name();

    // Action repertoire: scenario primitives, then previously learned
    // executors in name order.
    let mut actions: Vec<AgentAction> =
        ipt.actions.iter().map(|a| AgentAction::Primitive(*a)).collect();
    for name in ipt.registry.operators() {
        actions.push(AgentAction::Learned(name));
    }

    // Bias set: the novelty's added actions plus the failed operator's own
    // realization, when it is in the repertoire.
    let mut biased: Vec<usize> = (base_actions().len()..ipt.actions.len()).collect();
    if let Ok(realization) = realize_operator(&op) {
        let action = match realization {
            Realization::Primitive(a) => Some(a),
            Realization::Approach(k) => Some(Action::Approach(k)),
            Realization::FaceAir => None,
        };
        if let Some(a) = action {
            if let Some(idx) = ipt.actions.iter().position(|x| *x == a) {
                if !biased.contains(&idx) {
                    biased.push(idx);
                }
            }
        }
    }
    biased.sort_unstable();

    let obs_len = ipt.world.observe().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut policy = PolicyNet::new(obs_len, cfg.learner.hidden, actions.len(), &mut rng);
    let mut expl = ExplorationState::new(
        strategy,
        biased,
        actions.len(),
        cfg.learner.epsilon_max,
    );
    let mut buffer = EpisodeBuffer::default();

    let mut successes: Vec<bool> = Vec::new();
    let mut returns: Vec<f64> = Vec::new();
    let mut log =
        TrainingLog { operator: target.clone(), strategy, episodes: Vec::new() };
    let mut training_steps: u64 = 0;
    let mut episodes_run: u64 = 0;
    let mut converged_flag = false;
    // Fallback snapshot: (trailing-window success count, parameters).
    let mut best: Option<(usize, PolicyNet)> = None;

    for e in 0..cfg.e_max {
        let epsilon = decayed(
            cfg.learner.epsilon_max,
            cfg.learner.epsilon_min,
            e,
            cfg.learner.decay_episodes,
        );
        let rho =
            decayed(cfg.learner.rho_max, cfg.learner.rho_min, e, cfg.learner.decay_episodes);
        expl.epsilon = epsilon;

        // A single placement can fail to host a training episode once
        // stochastic stand-ins run in the prefix; retry on derived seeds and
        // only propagate a failure that survives every attempt.
        let mut reach = Ok(());
        for attempt in 0..REACH_ATTEMPTS {
            reach = reach_failed_operator(ipt, &target, reach_seed(seed, e, attempt));
            match &reach {
                Ok(()) => break,
                Err(err) if reach_retryable(err) => continue,
                Err(_) => break,
            }
        }
        reach?;
        let reach_steps = ipt.world.step_count();

        let run =
            run_episode(ipt, &clauses, &actions, &policy, &mut expl, rho, cfg, &mut rng)?;
        let ep_steps = (ipt.world.step_count() - reach_steps) as u64;
        training_steps += ep_steps;
        episodes_run = e + 1;

        successes.push(run.success);
        returns.push(run.ret);
        buffer.steps.extend(run.transitions);

        if (e + 1) % cfg.update_rate == 0 && !buffer.is_empty() {
            update_network(&mut policy, &mut buffer, &cfg.learner)
                .expect("buffer checked nonempty");
        }

        if successes.len() >= cfg.upsilon {
            let wins =
                successes[successes.len() - cfg.upsilon..].iter().filter(|s| **s).count();
            if best.as_ref().map(|(b, _)| wins > *b).unwrap_or(true) {
                best = Some((wins, policy.clone()));
            }
        }

        log.episodes.push(EpisodeRecord {
            episode: e,
            steps: ep_steps,
            ret: run.ret,
            success: run.success,
            epsilon,
            rho,
        });

        if converged(&successes, &returns, cfg) {
            converged_flag = true;
            break;
        }
    }

    let final_policy = if converged_flag {
        policy
    } else {
        best.map(|(_, p)| p).unwrap_or(policy)
    };

    Ok((
        Executor {
            operator: target,
            actions,
            policy: final_policy,
            clauses,
            converged: converged_flag,
            episodes: episodes_run,
            training_steps,
            strategy,
        },
        log,
    ))
}
