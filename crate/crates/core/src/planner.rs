//! Forward state-space planner for the numeric STRIPS tasks produced by
//! [`crate::symbolic`].
//!
//! Search is weighted best-first (default w=2) on a goal-count heuristic:
//! each unsatisfied goal conjunct contributes 1, numeric conjuncts contribute
//! their normalized shortfall. Ties break FIFO so results are deterministic.
//! The node budget bounds worst-case work; exhausting it is reported as
//! [`PlanError::Timeout`], which is distinct from a proven [`PlanError::NoPlan`].

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::symbolic::{GroundTask, SymbolicState};

/// A solution: operator indices into [`GroundTask::operators`], in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    /// Operator indices, first step first.
    pub steps: Vec<usize>,
    /// Step count.
    pub cost: usize,
}

impl Plan {
    /// Renders each step as its operator display name.
    pub fn render(&self, task: &GroundTask) -> Vec<String> {
        self.steps.iter().map(|i| task.operators[*i].display_name()).collect()
    }
}

/// Why no plan was returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanError {
    /// The reachable state space was exhausted without finding the goal.
    NoPlan,
    /// The node budget ran out; plannability is unknown.
    Timeout,
}

impl core::fmt::Display for PlanError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PlanError::NoPlan => write!(f, "no plan exists"),
            PlanError::Timeout => write!(f, "search budget exhausted"),
        }
    }
}

/// Three-valued answer to "can the goal still be reached from here?".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plannability {
    /// A plan was found.
    Plannable,
    /// The full reachable space was searched; no plan exists.
    Unplannable,
    /// The search budget ran out before either answer.
    Unknown,
}

/// Search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Heuristic weight in f = g + w·h.
    pub weight: u32,
    /// Maximum node expansions before giving up with [`PlanError::Timeout`].
    pub node_budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { weight: 2, node_budget: 200_000 }
    }
}

/// Heuristic scale: h is a sum of per-conjunct shortfalls in [0, 1], kept as
/// integers in thousandths so f-values order exactly.
const H_SCALE: u64 = 1000;

fn heuristic(task: &GroundTask, s: &SymbolicState) -> u64 {
    let mut h = 0u64;
    for id in task.goal_pos.iter() {
        if !s.facts.get(id) {
            h += H_SCALE;
        }
    }
    for id in task.goal_neg.iter() {
        if s.facts.get(id) {
            h += H_SCALE;
        }
    }
    for (f, b) in &task.goal_num {
        let v = s.fluents[*f];
        if v < *b {
            // Normalized shortfall (b − v)/b, clipped to [0, 1].
            let num = (*b - v) as u64 * H_SCALE / (*b as u64).max(1);
            h += num.min(H_SCALE);
        }
    }
    h
}

/// Searches for a plan from the task's initial state.
pub fn plan(task: &GroundTask, cfg: &SearchConfig) -> Result<Plan, PlanError> {
    plan_from(task, &task.s0, cfg)
}

/// Searches for a plan from an arbitrary start state.
pub fn plan_from(
    task: &GroundTask,
    start: &SymbolicState,
    cfg: &SearchConfig,
) -> Result<Plan, PlanError> {
    if task.satisfies_goal(start) {
        return Ok(Plan { steps: Vec::new(), cost: 0 });
    }

    // Arena of discovered nodes for path reconstruction.
    struct Node {
        state: SymbolicState,
        parent: usize,
        op: usize,
        g: u64,
    }
    let mut nodes: Vec<Node> = Vec::new();
    nodes.push(Node { state: start.clone(), parent: usize::MAX, op: usize::MAX, g: 0 });

    // Best known g per state; doubles as the closed list.
    let mut best_g: BTreeMap<SymbolicState, u64> = BTreeMap::new();
    best_g.insert(start.clone(), 0);

    // Min-heap on (f, insertion sequence) — FIFO among equal f.
    let mut open: BinaryHeap<Reverse<(u64, u64, usize)>> = BinaryHeap::new();
    let mut seq: u64 = 0;
    let h0 = heuristic(task, start);
    open.push(Reverse((u64::from(cfg.weight) * h0, seq, 0)));

    let mut expansions: usize = 0;
    while let Some(Reverse((_, _, idx))) = open.pop() {
        let (g, state) = (nodes[idx].g, nodes[idx].state.clone());
        // Skip stale queue entries superseded by a cheaper path.
        if best_g.get(&state).copied().unwrap_or(u64::MAX) < g {
            continue;
        }
        expansions += 1;
        if expansions > cfg.node_budget {
            return Err(PlanError::Timeout);
        }
        for (op_idx, op) in task.operators.iter().enumerate() {
            if !task.applicable(&state, op) {
                continue;
            }
            // A validated domain can't underflow; skip defensively if one does.
            let Ok(next) = task.apply(&state, op) else { continue };
            let ng = g + H_SCALE;
            if best_g.get(&next).is_some_and(|known| *known <= ng) {
                continue;
            }
            best_g.insert(next.clone(), ng);
            let node_idx = nodes.len();
            if task.satisfies_goal(&next) {
                // Reconstruct: walk parents from the goal node.
                let mut steps = alloc::vec![op_idx];
                let mut at = idx;
                while nodes[at].parent != usize::MAX {
                    steps.push(nodes[at].op);
                    at = nodes[at].parent;
                }
                steps.reverse();
                let cost = steps.len();
                return Ok(Plan { steps, cost });
            }
            nodes.push(Node { state: next, parent: idx, op: op_idx, g: ng });
            let f = ng + u64::from(cfg.weight) * heuristic(task, &nodes[node_idx].state);
            seq += 1;
            open.push(Reverse((f, seq, node_idx)));
        }
    }
    Err(PlanError::NoPlan)
}

/// Checks a plan step by step. `Err(i)` is the first inapplicable step;
/// `Err(plan.steps.len())` means every step applied but the goal is unmet.
pub fn validate(task: &GroundTask, plan: &Plan) -> Result<(), usize> {
    let mut s = task.s0.clone();
    for (i, op_idx) in plan.steps.iter().enumerate() {
        match task.apply(&s, &task.operators[*op_idx]) {
            Ok(next) => s = next,
            Err(_) => return Err(i),
        }
    }
    if task.satisfies_goal(&s) {
        Ok(())
    } else {
        Err(plan.steps.len())
    }
}

/// Three-valued plannability from an arbitrary state (Timeout → Unknown).
pub fn exists_plan(task: &GroundTask, s: &SymbolicState, cfg: &SearchConfig) -> Plannability {
    match plan_from(task, s, cfg) {
        Ok(_) => Plannability::Plannable,
        Err(PlanError::NoPlan) => Plannability::Unplannable,
        Err(PlanError::Timeout) => Plannability::Unknown,
    }
}
