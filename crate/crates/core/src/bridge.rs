//! Symbol ↔ sub-symbol glue: the state detector, operator execution with
//! impasse detection, learned-executor bookkeeping with its termination
//! test, and the top-level plan–execute–recover loop.
//!
//! The loop's contract: execute a plan operator-by-operator, gating each
//! against its symbolic precondition while the plan is fresh. The first time
//! an operator's declared effects fail to materialize, hand control to the
//! operator's learned executor (training one first if none is registered).
//! After an executor has run, the remaining plan tail is *stale* — it is no
//! longer precondition-gated, only effect-checked, so follow-on breakage
//! surfaces as further impasses rather than aborts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::learner::{PolicyNet, Strategy};
use crate::novelty::NoveltySpec;
use crate::planner::{plan_from, Plan, PlanError, Plannability, SearchConfig};
use crate::symbolic::{
    ground, parse_domain, validate_domain, Domain, GroundOperator, GroundTask, SymbolicState,
    TypedName, DOMAIN_PDDL,
};
use crate::util::Bits;
use crate::world::{base_actions, Action, EntityKind, World, WorldConfig, WorldError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The nine object names every scenario declares, in fixed order; novelty
/// entities append after them.
pub const BASE_OBJECT_NAMES: [&str; 9] = [
    "wall",
    "tree_log",
    "crafting_table",
    "plank",
    "stick",
    "tree_tap",
    "rubber",
    "pogo_stick",
    "air",
];

/// Maps world states to symbolic states over a fixed object set.
///
/// Rules: `facing` comes from the cell in front of the agent (items and open
/// floor both read as `air`); `holding` from the selected inventory item
/// (`air` when nothing is selected); `floating` marks kinds lying loose on
/// the floor; `inventory`/`world` fluents mirror the exact counts, with
/// `world air` the open-floor count and `world fire` the burning-cell count.
#[derive(Debug, Clone)]
pub struct Detector {
    n_fluents: usize,
    facing: BTreeMap<String, usize>,
    holding: BTreeMap<String, usize>,
    floating: BTreeMap<String, usize>,
    inventory: BTreeMap<String, usize>,
    world_of: BTreeMap<String, usize>,
}

impl Detector {
    /// Builds the lookup tables for a grounded task's object set.
    pub fn new(task: &GroundTask) -> Detector {
        let mut d = Detector {
            n_fluents: task.fluents.len(),
            facing: BTreeMap::new(),
            holding: BTreeMap::new(),
            floating: BTreeMap::new(),
            inventory: BTreeMap::new(),
            world_of: BTreeMap::new(),
        };
        for obj in &task.objects {
            let name = obj.name.as_str();
            if let Some(id) = task.fact_id("facing", &[name]) {
                d.facing.insert(obj.name.clone(), id);
            }
            if let Some(id) = task.fact_id("holding", &[name]) {
                d.holding.insert(obj.name.clone(), id);
            }
            if let Some(id) = task.fact_id("floating", &[name]) {
                d.floating.insert(obj.name.clone(), id);
            }
            if let Some(id) = task.fluent_id("inventory", &[name]) {
                d.inventory.insert(obj.name.clone(), id);
            }
            if let Some(id) = task.fluent_id("world", &[name]) {
                d.world_of.insert(obj.name.clone(), id);
            }
        }
        d
    }

    /// Extracts the symbolic state of a world.
    pub fn detect(&self, world: &World) -> SymbolicState {
        let mut facts = Bits::new();
        let mut fluents = alloc::vec![0i64; self.n_fluents];

        let faced = world.facing_kind().map(|k| k.name()).unwrap_or("air");
        if let Some(&id) = self.facing.get(faced) {
            facts.set(id);
        }
        let held = world.selected().map(|k| k.name()).unwrap_or("air");
        if let Some(&id) = self.holding.get(held) {
            facts.set(id);
        }
        for (name, &id) in &self.floating {
            if let Some(kind) = EntityKind::from_name(name) {
                if world.loose_count(kind) > 0 {
                    facts.set(id);
                }
            }
        }
        for (name, &id) in &self.world_of {
            fluents[id] = if name == "air" {
                world.air_count()
            } else {
                EntityKind::from_name(name).map(|k| world.world_count(k)).unwrap_or(0)
            };
        }
        for (name, &id) in &self.inventory {
            if let Some(kind) = EntityKind::from_name(name) {
                fluents[id] = world.count(kind);
            }
        }
        facts.normalize();
        SymbolicState { facts, fluents }
    }
}

/// How a ground operator is carried out in the world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realization {
    /// One primitive world action.
    Primitive(Action),
    /// Navigate until facing the named entity.
    Approach(EntityKind),
    /// Navigate until facing an open cell.
    FaceAir,
}

/// Errors from operator execution and the recovery loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecError {
    /// The operator's symbolic precondition did not hold in the detected
    /// state — a planner/detector defect, not a novelty impasse.
    PreconditionUnmet {
        /// Ground operator display name.
        operator: String,
    },
    /// The operator has no realization in this world's action repertoire.
    Unrealizable {
        /// Ground operator display name.
        operator: String,
    },
    /// A navigation macro found no route to its target — a placement
    /// pathology, not a novelty impasse.
    RouteFailed,
    /// The episode's step horizon expired.
    EpisodeOver,
}

impl core::fmt::Display for ExecError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExecError::PreconditionUnmet { operator } => {
                write!(f, "precondition unmet for `{operator}` in the detected state")
            }
            ExecError::Unrealizable { operator } => {
                write!(f, "operator `{operator}` has no primitive realization")
            }
            ExecError::RouteFailed => write!(f, "no route to the navigation target"),
            ExecError::EpisodeOver => write!(f, "episode horizon expired"),
        }
    }
}

/// Derives the realization of a ground operator.
pub fn realize_operator(op: &GroundOperator) -> Result<Realization, ExecError> {
    let unrealizable = || ExecError::Unrealizable { operator: op.display_name() };
    match op.schema.as_str() {
        "approach" => {
            let target = op.args.get(1).ok_or_else(unrealizable)?;
            if target == "air" {
                Ok(Realization::FaceAir)
            } else {
                EntityKind::from_name(target).map(Realization::Approach).ok_or_else(unrealizable)
            }
        }
        "break" => Ok(Realization::Primitive(Action::Break)),
        "extractrubber" => Ok(Realization::Primitive(Action::ExtractRubber)),
        "craftplank" => Ok(Realization::Primitive(Action::CraftPlanks)),
        "craftstick" => Ok(Realization::Primitive(Action::CraftStick)),
        "crafttree_tap" => Ok(Realization::Primitive(Action::CraftTreeTap)),
        "craftpogo_stick" => Ok(Realization::Primitive(Action::CraftPogoStick)),
        "select" => {
            let target = op.args.first().ok_or_else(unrealizable)?;
            EntityKind::from_name(target)
                .map(|k| Realization::Primitive(Action::Select(k)))
                .ok_or_else(unrealizable)
        }
        _ => Err(unrealizable()),
    }
}

/// Result of carrying out one operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOutcome {
    /// True iff the operator's declared effects held afterwards.
    pub success: bool,
    /// World steps consumed.
    pub steps: usize,
}

/// A conjunction that recognizes "this operator's declared effects hold":
/// added facts present, deleted facts absent, and each increased fluent at
/// least at its increase amount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectClause {
    /// Facts that must hold.
    pub adds: Bits,
    /// Facts that must not hold.
    pub dels: Bits,
    /// Fluent lower bounds (id, k): state satisfies when fluent ≥ k.
    pub bounds: Vec<(usize, i64)>,
}

impl EffectClause {
    /// The clause recognizing `op`'s effects.
    pub fn of_operator(op: &GroundOperator) -> EffectClause {
        EffectClause {
            adds: op.add.clone(),
            dels: op.del.clone(),
            bounds: op.increases.clone(),
        }
    }

    /// True when the state satisfies the conjunction.
    pub fn matches(&self, s: &SymbolicState) -> bool {
        s.facts.contains_all(&self.adds)
            && !s.facts.intersects(&self.dels)
            && self.bounds.iter().all(|(f, k)| s.fluents[*f] >= *k)
    }

    /// Name-based form for serialization and debugging.
    pub fn to_names(&self, task: &GroundTask) -> ClauseNames {
        ClauseNames {
            adds: self.adds.iter().map(|i| task.fact_name(i)).collect(),
            dels: self.dels.iter().map(|i| task.fact_name(i)).collect(),
            bounds: self.bounds.iter().map(|(f, k)| (task.fluent_name(*f), *k)).collect(),
        }
    }

    /// Rebuilds the id-based clause; None if a name is unknown to the task.
    pub fn from_names(names: &ClauseNames, task: &GroundTask) -> Option<EffectClause> {
        let fact = |s: &str| -> Option<usize> {
            let mut parts = s.split(' ');
            let head = parts.next()?;
            let args: Vec<&str> = parts.collect();
            task.fact_id(head, &args)
        };
        let fluent = |s: &str| -> Option<usize> {
            let mut parts = s.split(' ');
            let head = parts.next()?;
            let args: Vec<&str> = parts.collect();
            task.fluent_id(head, &args)
        };
        let mut clause = EffectClause { adds: Bits::new(), dels: Bits::new(), bounds: Vec::new() };
        for a in &names.adds {
            clause.adds.set(fact(a)?);
        }
        for d in &names.dels {
            clause.dels.set(fact(d)?);
        }
        for (f, k) in &names.bounds {
            clause.bounds.push((fluent(f)?, *k));
        }
        Some(clause)
    }
}

/// Serializable, task-independent clause form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseNames {
    /// Facts that must hold, as "head arg…" strings.
    pub adds: Vec<String>,
    /// Facts that must not hold.
    pub dels: Vec<String>,
    /// Fluent lower bounds by name.
    pub bounds: Vec<(String, i64)>,
}

/// One entry of an executor's action repertoire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentAction {
    /// A primitive world action; `approach_*` entries run as navigation
    /// macros.
    Primitive(Action),
    /// A previously learned executor, by its operator's display name.
    Learned(String),
}

impl AgentAction {
    /// Stable display name.
    pub fn name(&self) -> String {
        match self {
            AgentAction::Primitive(a) => a.name(),
            AgentAction::Learned(op) => format!("executor[{op}]"),
        }
    }
}

/// A learned recovery routine bound to one failed operator.
#[derive(Debug, Clone)]
pub struct Executor {
    /// Ground operator display name this executor recovers.
    pub operator: String,
    /// Action repertoire snapshot the policy indexes into.
    pub actions: Vec<AgentAction>,
    /// The trained softmax policy.
    pub policy: PolicyNet,
    /// Termination clauses (the plannable-state disjunction at training
    /// time); the executor stops when one holds *and* the detected state is
    /// plannable.
    pub clauses: Vec<EffectClause>,
    /// Whether training met the convergence test.
    pub converged: bool,
    /// Training episodes consumed.
    pub episodes: u64,
    /// Training world-steps consumed (in-episode + curriculum).
    pub training_steps: u64,
    /// Exploration strategy used during training.
    pub strategy: Strategy,
}

/// Operator name → learned executor; at most one executor per operator
/// (re-registration replaces).
#[derive(Debug, Clone, Default)]
pub struct ExecutorRegistry {
    map: BTreeMap<String, Executor>,
}

impl ExecutorRegistry {
    /// Empty registry.
    pub fn new() -> ExecutorRegistry {
        ExecutorRegistry::default()
    }

    /// Looks up the executor for an operator display name.
    pub fn get(&self, operator: &str) -> Option<&Executor> {
        self.map.get(operator)
    }

    /// Registers (or replaces) the executor for its operator.
    pub fn insert(&mut self, executor: Executor) {
        self.map.insert(executor.operator.clone(), executor);
    }

    /// Number of registered executors.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// True when no executor is registered.
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Registered operator names in sorted order.
    pub fn operators(&self) -> Vec<String> {
        self.map.keys().cloned().collect()
    }

    /// Iterates executors in sorted operator order.
    pub fn iter(&self) -> impl Iterator<Item = &Executor> {
        self.map.values()
    }
}

/// Errors building a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    /// The bundled domain failed to parse (corrupt asset).
    Domain(String),
    /// Grounding failed.
    Ground(String),
    /// World placement failed.
    World(WorldError),
    /// The freshly built task has no plan — the scenario is not a valid
    /// stretch task.
    NotPlannable,
}

impl core::fmt::Display for BuildError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BuildError::Domain(e) => write!(f, "bundled domain invalid: {e}"),
            BuildError::Ground(e) => write!(f, "grounding failed: {e}"),
            BuildError::World(e) => write!(f, "world placement failed: {e}"),
            BuildError::NotPlannable => write!(f, "initial configuration is not plannable"),
        }
    }
}

/// A fully assembled scenario: world + symbolic task + detector + learned
/// executors, with memoized planner verdicts.
#[derive(Debug)]
pub struct StretchIPT {
    /// Injected novelty, if any.
    pub novelty: Option<NoveltySpec>,
    /// The live simulator.
    pub world: World,
    /// Validated domain model.
    pub domain: Domain,
    /// Grounded planning task; goal fixed to owning a pogo stick.
    pub task: GroundTask,
    /// World → symbolic state extraction.
    pub detector: Detector,
    /// Primitive action repertoire (base + novelty actions).
    pub actions: Vec<Action>,
    /// Learned executors keyed by operator.
    pub registry: ExecutorRegistry,
    /// Planner search settings.
    pub search: SearchConfig,
    /// Times the planner's node budget expired during plannability checks
    /// (treated as "no plan", logged here).
    pub planner_unknowns: u64,
    plan_cache: BTreeMap<SymbolicState, Result<Plan, PlanError>>,
}

impl StretchIPT {
    /// Assembles a scenario: parses and validates the bundled domain,
    /// declares base + novelty objects, grounds, places a world from the
    /// seed, and requires the result to be plannable.
    pub fn build(novelty: Option<&NoveltySpec>, seed: u64) -> Result<StretchIPT, BuildError> {
        let mut domain =
            parse_domain(DOMAIN_PDDL).map_err(|e| BuildError::Domain(format!("{e}")))?;
        validate_domain(&mut domain);

        let mut objects: Vec<TypedName> = BASE_OBJECT_NAMES
            .iter()
            .map(|n| TypedName { name: n.to_string(), ty: String::from("physobj") })
            .collect();
        let (config, actions) = match novelty {
            Some(n) => {
                for kind in &n.new_entities {
                    objects
                        .push(TypedName {
                            name: kind.name().to_string(),
                            ty: String::from("physobj"),
                        });
                }
                (n.world_config(), n.action_list())
            }
            None => (WorldConfig::default(), base_actions()),
        };

        let mut task =
            ground(&domain, &objects).map_err(|e| BuildError::Ground(format!("{e}")))?;
        let goal = task
            .fluent_id("inventory", &["pogo_stick"])
            .ok_or_else(|| BuildError::Ground(String::from("missing goal fluent")))?;
        task.goal_num = alloc::vec![(goal, 1)];

        let world = World::new(&config, seed).map_err(BuildError::World)?;
        let detector = Detector::new(&task);
        task.s0 = detector.detect(&world);

        let mut ipt = StretchIPT {
            novelty: novelty.cloned(),
            world,
            domain,
            task,
            detector,
            actions,
            registry: ExecutorRegistry::new(),
            search: SearchConfig::default(),
            planner_unknowns: 0,
            plan_cache: BTreeMap::new(),
        };
        if ipt.plannable(&ipt.task.s0.clone()) != Plannability::Plannable {
            return Err(BuildError::NotPlannable);
        }
        Ok(ipt)
    }

    /// Re-places the world from a seed (same configuration, fresh layout)
    /// and refreshes the task's initial state. Learned executors and planner
    /// memoization survive.
    pub fn reset(&mut self, seed: u64) -> Result<(), WorldError> {
        let config = self.world.config().clone();
        self.world = World::new(&config, seed)?;
        self.task.s0 = self.detector.detect(&self.world);
        Ok(())
    }

    /// Detects the current symbolic state.
    pub fn detect(&self) -> SymbolicState {
        self.detector.detect(&self.world)
    }

    /// Plans from a symbolic state to the fixed goal, memoized.
    pub fn plan_from_state(&mut self, s: &SymbolicState) -> Result<Plan, PlanError> {
        if let Some(r) = self.plan_cache.get(s) {
            return r.clone();
        }
        let r = plan_from(&self.task, s, &self.search);
        if matches!(r, Err(PlanError::Timeout)) {
            self.planner_unknowns += 1;
        }
        self.plan_cache.insert(s.clone(), r.clone());
        r
    }

    /// Tri-state plannability of a symbolic state, memoized. A planner
    /// timeout reads as Unknown (and is counted in `planner_unknowns`).
    pub fn plannable(&mut self, s: &SymbolicState) -> Plannability {
        match self.plan_from_state(s) {
            Ok(_) => Plannability::Plannable,
            Err(PlanError::NoPlan) => Plannability::Unplannable,
            Err(PlanError::Timeout) => Plannability::Unknown,
        }
    }

    /// The novel entity kinds of the injected novelty (empty pre-novelty).
    pub fn novel_entities(&self) -> Vec<EntityKind> {
        self.novelty.as_ref().map(|n| n.new_entities.clone()).unwrap_or_default()
    }

    /// The number of the scenario's primitive actions that are novel.
    pub fn novel_action_count(&self) -> usize {
        self.actions.len() - base_actions().len()
    }

    /// Carries out a realization; returns world steps consumed. A macro with
    /// no route to its target (missing or unreachable) is a placement
    /// pathology and surfaces as `ExecError::RouteFailed`; an expired
    /// horizon as `ExecError::EpisodeOver`.
    pub fn execute_realization(&mut self, r: &Realization) -> Result<usize, ExecError> {
        let route = match r {
            Realization::Primitive(a) => {
                self.world.step(*a).map_err(|_| ExecError::EpisodeOver)?;
                return Ok(1);
            }
            Realization::Approach(kind) => {
                self.world.approach_route(*kind).map_err(|_| ExecError::RouteFailed)?
            }
            Realization::FaceAir => {
                self.world.face_air_route().map_err(|_| ExecError::RouteFailed)?
            }
        };
        let run = self.world.run_route(route);
        if run.completed {
            Ok(run.actions.len())
        } else {
            Err(ExecError::EpisodeOver)
        }
    }

    /// Executes one plan operator with the strict precondition gate: errors
    /// with `PreconditionUnmet` if the detected state violates ψ, otherwise
    /// runs the realization and reports whether the declared effects held.
    pub fn execute_operator(&mut self, op_id: usize) -> Result<ExecOutcome, ExecError> {
        let op = self.task.operators[op_id].clone();
        let pre = self.detect();
        if !self.task.applicable(&pre, &op) {
            return Err(ExecError::PreconditionUnmet { operator: op.display_name() });
        }
        self.attempt_operator_from(op_id, pre)
    }

    /// Executes one plan operator without gating (stale-tail mode): runs the
    /// realization and effect-checks the transition.
    pub fn attempt_operator(&mut self, op_id: usize) -> Result<ExecOutcome, ExecError> {
        let pre = self.detect();
        self.attempt_operator_from(op_id, pre)
    }

    fn attempt_operator_from(
        &mut self,
        op_id: usize,
        pre: SymbolicState,
    ) -> Result<ExecOutcome, ExecError> {
        let op = self.task.operators[op_id].clone();
        let realization = realize_operator(&op)?;
        let steps = self.execute_realization(&realization)?;
        let post = self.detect();
        Ok(ExecOutcome { success: self.task.effects_met(&pre, &post, &op), steps })
    }

    /// Executes one repertoire entry; returns world steps consumed. The rng
    /// drives learned sub-executors, whose policies are sampled.
    pub fn execute_agent_action(
        &mut self,
        a: &AgentAction,
        rng: &mut impl Rng,
    ) -> Result<usize, ExecError> {
        match a {
            AgentAction::Primitive(Action::Approach(kind)) => {
                match self.world.approach_route(*kind) {
                    Ok(route) if !route.is_empty() => {
                        let run = self.world.run_route(route);
                        if run.completed {
                            Ok(run.actions.len())
                        } else {
                            Err(ExecError::EpisodeOver)
                        }
                    }
                    // Already facing the target, or no route at all: charge
                    // the raw primitive's timestep like any other wasted
                    // action — a decision always costs time.
                    _ => {
                        self.world
                            .step(Action::Approach(*kind))
                            .map_err(|_| ExecError::EpisodeOver)?;
                        Ok(1)
                    }
                }
            }
            AgentAction::Primitive(a) => {
                self.world.step(*a).map_err(|_| ExecError::EpisodeOver)?;
                Ok(1)
            }
            AgentAction::Learned(op) => {
                let run = self.run_executor_by_name(op, rng)?;
                Ok(run.steps)
            }
        }
    }

    /// Termination test for an executor's clause set: some clause holds in
    /// the detected state *and* that state is plannable. A planner timeout
    /// reads as not plannable.
    pub fn beta(&mut self, clauses: &[EffectClause]) -> bool {
        let s = self.detect();
        clauses.iter().any(|c| c.matches(&s))
            && self.plannable(&s) == Plannability::Plannable
    }

    /// Rolls out a registered executor until its termination test fires or
    /// the episode ends, sampling its stochastic policy. Returns steps
    /// consumed and whether the termination state was reached.
    pub fn run_executor_by_name(
        &mut self,
        operator: &str,
        rng: &mut impl Rng,
    ) -> Result<ExecutorRun, ExecError> {
        let (policy, actions, clauses) = match self.registry.get(operator) {
            Some(x) => (x.policy.clone(), x.actions.clone(), x.clauses.clone()),
            None => {
                return Err(ExecError::Unrealizable { operator: operator.to_string() });
            }
        };
        let mut steps = 0usize;
        // Decision budget guards against policies wedged on zero-step
        // choices; the world horizon is the hard stop.
        for _ in 0..self.world.config().horizon {
            if self.beta(&clauses) {
                return Ok(ExecutorRun { steps, recovered: true });
            }
            if self.world.episode_over() {
                return Ok(ExecutorRun { steps, recovered: false });
            }
            let obs = self.world.observe();
            let probs = match policy.probs(&obs) {
                Ok(p) => p,
                Err(_) => {
                    return Err(ExecError::Unrealizable { operator: operator.to_string() })
                }
            };
            let choice = crate::learner::sample_index(&probs, rng);
            match self.execute_agent_action(&actions[choice], rng) {
                Ok(n) => steps += n,
                Err(ExecError::EpisodeOver) => {
                    return Ok(ExecutorRun { steps, recovered: false })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(ExecutorRun { steps, recovered: self.beta(&clauses) })
    }
}

/// Result of one executor rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecutorRun {
    /// World steps consumed.
    pub steps: usize,
    /// Whether the termination test fired.
    pub recovered: bool,
}

/// Errors from the top-level loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunError {
    /// Scenario construction failed.
    Build(BuildError),
    /// World error outside an episode (placement on reset).
    World(WorldError),
    /// A loud executor/operator defect.
    Exec(ExecError),
    /// An operator before the training target failed with no executor to
    /// stand in — a distinct, unexpected impasse.
    PrefixExecutionFailed {
        /// The operator that failed.
        operator: String,
    },
    /// A training reset walked the whole plan without the target operator
    /// failing — there is no recovery context to train in.
    TargetNeverFailed {
        /// The operator that was supposed to fail.
        operator: String,
    },
    /// A training reset could not plan from the fresh placement.
    ReachPlanningFailed(PlanError),
    /// Discovery was asked to train an operator position outside the plan.
    OperatorNotInPlan {
        /// Requested plan position.
        at: usize,
        /// Plan length.
        plan_len: usize,
    },
}

impl core::fmt::Display for RunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RunError::Build(e) => write!(f, "{e}"),
            RunError::World(e) => write!(f, "{e}"),
            RunError::Exec(e) => write!(f, "{e}"),
            RunError::PrefixExecutionFailed { operator } => {
                write!(f, "unexpected failure of `{operator}` before the training target")
            }
            RunError::TargetNeverFailed { operator } => {
                write!(f, "`{operator}` never failed on a fresh placement")
            }
            RunError::ReachPlanningFailed(e) => {
                write!(f, "planning from a fresh placement failed: {e}")
            }
            RunError::OperatorNotInPlan { at, plan_len } => {
                write!(f, "plan position {at} is out of range for a {plan_len}-step plan")
            }
        }
    }
}

impl From<BuildError> for RunError {
    fn from(e: BuildError) -> Self {
        RunError::Build(e)
    }
}

impl From<WorldError> for RunError {
    fn from(e: WorldError) -> Self {
        RunError::World(e)
    }
}

impl From<ExecError> for RunError {
    fn from(e: ExecError) -> Self {
        RunError::Exec(e)
    }
}

/// How one plan-execution pass ended.
#[derive(Debug, Clone)]
pub enum PassEnd {
    /// Goal reached.
    Success,
    /// An operator failed with no registered executor. Carries the active
    /// plan and the failure position for executor discovery.
    NeedsDiscovery {
        /// The plan being executed.
        plan: Plan,
        /// Index into `plan.steps` of the failed operator.
        at: usize,
    },
    /// The pass failed (horizon, unrecovered executor, or no plan).
    Failed {
        /// Human-readable reason.
        reason: String,
    },
}

/// Executes plans until the goal, a missing-executor impasse, or failure.
///
/// Fresh plans are precondition-gated operator by operator; once a learned
/// executor has run, the rest of that plan is only effect-checked. If a plan
/// runs out without reaching the goal, the loop replans from the current
/// state (a bounded number of times). The rng drives executor policy
/// sampling.
pub fn run_pass(ipt: &mut StretchIPT, rng: &mut impl Rng) -> Result<PassEnd, RunError> {
    let mut recoveries = 0;
    run_pass_counting(ipt, &mut recoveries, rng)
}

/// Outcome of an adaptation run.
#[derive(Debug, Clone)]
pub struct AdaptReport {
    /// Whether a full pass eventually succeeded.
    pub success: bool,
    /// Passes executed (including the successful one).
    pub passes: u32,
    /// Operators that required discovery, in order.
    pub discoveries: Vec<String>,
    /// Total training world-steps across discoveries (time to adapt).
    pub adaptation_steps: u64,
    /// Discoveries that exhausted the episode budget unconverged.
    pub unconverged: u32,
    /// Planner-budget expirations observed during the run.
    pub planner_unknowns: u64,
    /// Failure reason of the last pass if unsuccessful.
    pub failure: Option<String>,
    /// Per-discovery training logs.
    pub logs: Vec<crate::discovery::TrainingLog>,
}

/// Outcome of one evaluation episode.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// Whether the goal was reached.
    pub success: bool,
    /// World steps consumed.
    pub steps: usize,
    /// Operator impasses bridged by registered executors.
    pub recoveries: u32,
    /// The operator that stalled the episode, if any.
    pub stalled_on: Option<String>,
}

/// Derives a fresh placement seed for pass `n` of a run seeded with `seed`.
pub fn pass_seed(seed: u64, n: u32) -> u64 {
    let mut bytes = [0u8; 12];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..].copy_from_slice(&n.to_le_bytes());
    crate::util::fnv1a64(&bytes)
}

/// Adaptation: repeat plan-execution passes on fresh placements, training
/// and registering an executor at each new impasse, until a pass succeeds
/// end to end. Returns the time-to-adapt accounting and training logs.
pub fn rapid_learn(
    ipt: &mut StretchIPT,
    strategy: Strategy,
    cfg: &crate::discovery::DiscoveryConfig,
    seed: u64,
) -> Result<AdaptReport, RunError> {
    let mut report = AdaptReport {
        success: false,
        passes: 0,
        discoveries: Vec::new(),
        adaptation_steps: 0,
        unconverged: 0,
        planner_unknowns: 0,
        failure: None,
        logs: Vec::new(),
    };
    for pass in 1..=cfg.max_passes {
        report.passes = pass;
        ipt.reset(pass_seed(seed, pass))?;
        // Executor sampling gets its own stream, away from the placement
        // (pass) and training (1000 + pass) seed families.
        let mut pass_rng = ChaCha8Rng::seed_from_u64(pass_seed(seed, 2_000_000 + pass));
        match run_pass(ipt, &mut pass_rng)? {
            PassEnd::Success => {
                report.success = true;
                report.failure = None;
                break;
            }
            PassEnd::NeedsDiscovery { plan, at } => {
                let trained = crate::discovery::discover_executor(
                    ipt,
                    &plan,
                    at,
                    strategy,
                    cfg,
                    pass_seed(seed, 1000 + pass),
                );
                match trained {
                    Ok((executor, log)) => {
                        report.adaptation_steps += executor.training_steps;
                        if !executor.converged {
                            report.unconverged += 1;
                        }
                        report.discoveries.push(executor.operator.clone());
                        report.logs.push(log);
                        ipt.registry.insert(executor);
                    }
                    // The impasse would not reproduce on any fresh placement:
                    // an upstream recovery repairs it as a side effect, so no
                    // executor is needed — try another pass.
                    Err(RunError::TargetNeverFailed { operator }) => {
                        report.failure =
                            Some(format!("impasse at `{operator}` not reproducible"));
                    }
                    Err(e) => return Err(e),
                }
            }
            PassEnd::Failed { reason } => {
                report.failure = Some(reason);
            }
        }
    }
    report.planner_unknowns = ipt.planner_unknowns;
    Ok(report)
}

/// Evaluation: one pass on a fresh placement with discovery disabled.
/// Registered executors still bridge impasses; a missing executor fails the
/// episode.
pub fn evaluate(ipt: &mut StretchIPT, seed: u64) -> Result<EvalReport, RunError> {
    ipt.reset(seed)?;
    let before = ipt.world.step_count();
    let mut recoveries = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(pass_seed(seed, 3_000_000));
    // Count recoveries by watching the registry-backed pass outcome.
    let end = run_pass_counting(ipt, &mut recoveries, &mut rng)?;
    let steps = (ipt.world.step_count() - before) as usize;
    match end {
        PassEnd::Success => {
            Ok(EvalReport { success: true, steps, recoveries, stalled_on: None })
        }
        PassEnd::NeedsDiscovery { plan, at } => Ok(EvalReport {
            success: false,
            steps,
            recoveries,
            stalled_on: Some(ipt.task.operators[plan.steps[at]].display_name()),
        }),
        PassEnd::Failed { reason } => Ok(EvalReport {
            success: false,
            steps,
            recoveries,
            stalled_on: Some(reason),
        }),
    }
}

/// `run_pass` with a recovery counter (shared implementation detail of
/// `evaluate`).
fn run_pass_counting(
    ipt: &mut StretchIPT,
    recoveries: &mut u32,
    rng: &mut impl Rng,
) -> Result<PassEnd, RunError> {
    const MAX_REPLANS: usize = 5;
    for _ in 0..=MAX_REPLANS {
        let s = ipt.detect();
        if ipt.task.satisfies_goal(&s) {
            return Ok(PassEnd::Success);
        }
        if ipt.world.episode_over() {
            return Ok(PassEnd::Failed { reason: String::from("horizon expired") });
        }
        let plan = match ipt.plan_from_state(&s) {
            Ok(p) => p,
            Err(e) => {
                return Ok(PassEnd::Failed { reason: format!("planning failed: {e}") });
            }
        };
        let mut pristine = true;
        for (at, &op_id) in plan.steps.iter().enumerate() {
            let result = if pristine {
                ipt.execute_operator(op_id)
            } else {
                ipt.attempt_operator(op_id)
            };
            let outcome = match result {
                Ok(o) => o,
                Err(ExecError::EpisodeOver) => {
                    return Ok(PassEnd::Failed { reason: String::from("horizon expired") });
                }
                Err(ExecError::RouteFailed) => {
                    return Ok(PassEnd::Failed {
                        reason: String::from("no route to a navigation target"),
                    });
                }
                Err(e) => return Err(e.into()),
            };
            if outcome.success {
                continue;
            }
            let name = ipt.task.operators[op_id].display_name();
            match ipt.registry.get(&name) {
                Some(_) => {
                    let run = ipt.run_executor_by_name(&name, rng)?;
                    if !run.recovered {
                        return Ok(PassEnd::Failed {
                            reason: format!("executor for `{name}` did not recover"),
                        });
                    }
                    *recoveries += 1;
                    pristine = false;
                }
                None => return Ok(PassEnd::NeedsDiscovery { plan: plan.clone(), at }),
            }
        }
    }
    Ok(PassEnd::Failed { reason: String::from("no progress after replanning") })
}
