//! Checks for executor discovery: terminal clause derivation, terminal
//! scoring, training resets, the guided curriculum, the convergence test,
//! and one full adaptation on the cheapest scenario.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rapidlearn_core::bridge::{
    evaluate, rapid_learn, run_pass, AgentAction, PassEnd, RunError, StretchIPT,
};
use rapidlearn_core::discovery::{
    converged, discover_executor, plannable_states, reach_failed_operator, run_curriculum,
    terminal_check, DiscoveryConfig,
};
use rapidlearn_core::learner::{Strategy, Transition};
use rapidlearn_core::novelty::{spec, NoveltyId};
use rapidlearn_core::planner::Plan;
use rapidlearn_core::util::Bits;
use rapidlearn_core::world::{Action, EntityKind};

fn closed_world(seed: u64) -> StretchIPT {
    StretchIPT::build(None, seed).expect("closed world builds")
}

fn novelty_world(id: NoveltyId, seed: u64) -> StretchIPT {
    StretchIPT::build(Some(&spec(id)), seed).expect("novelty world builds")
}

fn fresh_plan(ipt: &mut StretchIPT) -> Plan {
    let s = ipt.detect();
    ipt.plan_from_state(&s).expect("fresh state is plannable")
}

fn position_of(ipt: &StretchIPT, plan: &Plan, schema: &str, occurrence: usize) -> usize {
    plan.steps
        .iter()
        .enumerate()
        .filter(|(_, &id)| ipt.task.operators[id].schema == schema)
        .map(|(at, _)| at)
        .nth(occurrence)
        .unwrap_or_else(|| panic!("{schema} occurrence {occurrence} in plan"))
}

#[test]
fn terminal_clause_sets_match_hand_derivations() {
    let mut ipt = closed_world(0);
    let plan = fresh_plan(&mut ipt);
    let task = &ipt.task;
    let names = |clauses: &[rapidlearn_core::bridge::EffectClause]| -> Vec<(Vec<String>, Vec<String>, Vec<(String, i64)>)> {
        clauses
            .iter()
            .map(|c| {
                let n = c.to_names(task);
                (n.adds, n.dels, n.bounds)
            })
            .collect()
    };

    // Rubber extraction: its own effect, plus the goal craft that consumes
    // the rubber.
    let at = position_of(&ipt, &plan, "extractrubber", 0);
    let clauses = plannable_states(task, &plan, at).expect("in range");
    assert_eq!(
        names(&clauses),
        vec![
            (vec![], vec![], vec![(String::from("inventory rubber"), 1)]),
            (vec![], vec![], vec![(String::from("inventory pogo_stick"), 1)]),
        ]
    );

    // First break: its own effect clause, plus the plank craft that consumes
    // the log. Later breaks in the plan collapse into the first clause.
    let at = position_of(&ipt, &plan, "break", 0);
    let clauses = plannable_states(task, &plan, at).expect("in range");
    assert_eq!(clauses.len(), 2);
    let own = clauses[0].to_names(task);
    assert_eq!(own.adds, vec![String::from("facing air")]);
    assert_eq!(own.dels, vec![String::from("facing tree_log")]);
    assert!(own.bounds.contains(&(String::from("inventory tree_log"), 1)));
    assert!(own.bounds.contains(&(String::from("world air"), 1)));
    assert_eq!(
        clauses[1].to_names(task).bounds,
        vec![(String::from("inventory plank"), 4)]
    );

    // Tap craft: its own effect, the selection that needs the tap, and the
    // extraction that needs it in the pack.
    let at = position_of(&ipt, &plan, "crafttree_tap", 0);
    let clauses = plannable_states(task, &plan, at).expect("in range");
    assert_eq!(clauses.len(), 3);
    assert_eq!(
        clauses[0].to_names(task).bounds,
        vec![(String::from("inventory tree_tap"), 1)]
    );
    let select = clauses[1].to_names(task);
    assert_eq!(select.adds, vec![String::from("holding tree_tap")]);
    assert_eq!(select.dels, vec![String::from("holding air")]);
    assert_eq!(select.bounds, vec![]);
    assert_eq!(
        clauses[2].to_names(task).bounds,
        vec![(String::from("inventory rubber"), 1)]
    );

    // The final operator has nothing after it: a singleton set.
    let at = plan.steps.len() - 1;
    let clauses = plannable_states(task, &plan, at).expect("in range");
    assert_eq!(clauses.len(), 1);
    assert_eq!(
        clauses[0].to_names(task).bounds,
        vec![(String::from("inventory pogo_stick"), 1)]
    );

    // Out-of-range positions are rejected.
    let err = plannable_states(task, &plan, plan.steps.len()).unwrap_err();
    assert_eq!(err.at, plan.steps.len());
    assert_eq!(err.plan_len, plan.steps.len());
}

#[test]
fn terminal_scoring_follows_plannability() {
    let cfg = DiscoveryConfig::default();
    let mut ipt = closed_world(9);
    let world_log = ipt.task.fluent_id("world", &["tree_log"]).unwrap();
    let inv_log = ipt.task.fluent_id("inventory", &["tree_log"]).unwrap();
    let inv_pogo = ipt.task.fluent_id("inventory", &["pogo_stick"]).unwrap();
    let clause = |bounds: Vec<(usize, i64)>| rapidlearn_core::bridge::EffectClause {
        adds: Bits::new(),
        dels: Bits::new(),
        bounds,
    };

    assert_eq!(
        terminal_check(&mut ipt, &[clause(vec![(world_log, 1)])], &cfg),
        Some((1000.0, true))
    );
    assert_eq!(terminal_check(&mut ipt, &[clause(vec![(inv_pogo, 1)])], &cfg), None);

    // Break every tree: logs in hand satisfy the clause, but the task is
    // dead, so the terminal fires with the penalty.
    while ipt.world.world_count(EntityKind::TreeLog) > 0 {
        let run = ipt.world.approach(EntityKind::TreeLog).expect("tree reachable");
        assert!(run.completed);
        ipt.world.step(Action::Break).expect("break ok");
    }
    assert_eq!(
        terminal_check(&mut ipt, &[clause(vec![(inv_log, 1)])], &cfg),
        Some((-350.0, false))
    );
}

#[test]
fn reach_stops_after_the_failed_attempt() {
    // Tool-dependency: the first break fails bare-handed, leaving the agent
    // facing the unbroken tree with nothing gathered.
    let mut ipt = novelty_world(NoveltyId::AtbEasy, 17);
    reach_failed_operator(&mut ipt, "break", 5).expect("reach finds the failure");
    let s = ipt.detect();
    let facing_tree = ipt.task.fact_id("facing", &["tree_log"]).unwrap();
    assert!(s.facts.get(facing_tree));
    let inv_log = ipt.task.fluent_id("inventory", &["tree_log"]).unwrap();
    assert_eq!(s.fluents[inv_log], 0);
    let steps = ipt.world.step_count();
    assert!(steps > 0, "reach consumed the approach prefix");

    // Determinism: the same seed reproduces the same prefix.
    reach_failed_operator(&mut ipt, "break", 5).expect("reach repeats");
    assert_eq!(ipt.world.step_count(), steps);
    assert_eq!(ipt.detect(), s);

    // Rubber-extraction novelty: reach walks deep into the plan, so the tap
    // is crafted and selected before the extraction attempt fails.
    let mut ipt = novelty_world(NoveltyId::RtEasy, 17);
    reach_failed_operator(&mut ipt, "extractrubber", 5).expect("reach finds the failure");
    let s = ipt.detect();
    let holding_tap = ipt.task.fact_id("holding", &["tree_tap"]).unwrap();
    assert!(s.facts.get(holding_tap));
    let inv_tap = ipt.task.fluent_id("inventory", &["tree_tap"]).unwrap();
    let inv_rubber = ipt.task.fluent_id("inventory", &["rubber"]).unwrap();
    assert_eq!(s.fluents[inv_tap], 1);
    assert_eq!(s.fluents[inv_rubber], 0);
}

#[test]
fn reach_rejects_targets_that_never_fail() {
    for seed in 0..5 {
        let mut ipt = closed_world(seed);
        match reach_failed_operator(&mut ipt, "break", seed) {
            Err(RunError::TargetNeverFailed { operator }) => assert_eq!(operator, "break"),
            other => panic!("seed {seed}: expected clean walk, got {other:?}"),
        }
    }
}

#[test]
fn curriculum_walks_to_a_novel_entity() {
    // Axe on the floor: the walk routes to it and logs one −1 transition per
    // primitive.
    let mut ipt = novelty_world(NoveltyId::AtbHard, 31);
    let actions: Vec<AgentAction> =
        ipt.actions.iter().map(|a| AgentAction::Primitive(*a)).collect();
    let mut transitions: Vec<Transition> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let before = ipt.world.step_count();
    run_curriculum(&mut ipt, &actions, &mut transitions, &mut rng);
    let walked = (ipt.world.step_count() - before) as usize;
    assert!(walked > 0, "the walk moved");
    assert_eq!(transitions.len(), walked);
    for t in &transitions {
        assert_eq!(t.reward, -1.0);
        assert!(!t.done);
        assert!(matches!(actions[t.action], AgentAction::Primitive(_)));
    }

    // Determinism: same placement and draw order, same walk.
    let mut ipt2 = novelty_world(NoveltyId::AtbHard, 31);
    let mut transitions2: Vec<Transition> = Vec::new();
    let mut rng2 = ChaCha8Rng::seed_from_u64(2);
    run_curriculum(&mut ipt2, &actions, &mut transitions2, &mut rng2);
    assert_eq!(transitions2.len(), transitions.len());

    // No novel entities (the disabled-break scenario): the walk is a no-op.
    let mut ipt = novelty_world(NoveltyId::Sp, 31);
    let actions: Vec<AgentAction> =
        ipt.actions.iter().map(|a| AgentAction::Primitive(*a)).collect();
    let mut transitions: Vec<Transition> = Vec::new();
    let before = ipt.world.step_count();
    run_curriculum(&mut ipt, &actions, &mut transitions, &mut rng);
    assert!(transitions.is_empty());
    assert_eq!(ipt.world.step_count(), before);
}

#[test]
fn convergence_requires_all_three_conditions() {
    let cfg = DiscoveryConfig::default();
    let perfect = |n: usize| (vec![true; n], vec![1000.0; n]);

    let (s, r) = perfect(195);
    assert!(!converged(&s, &r, &cfg), "too short");
    let (s, r) = perfect(196);
    assert!(converged(&s, &r, &cfg), "minimum perfect history");

    // 95 wins in the trailing window is one too few.
    let (mut s, r) = perfect(196);
    for i in 0..5 {
        s[195 - i] = false;
    }
    assert!(!converged(&s, &r, &cfg));

    // Low mean return fails even with every episode succeeding.
    let (s, mut r) = perfect(196);
    for g in r.iter_mut() {
        *g = 899.0;
    }
    assert!(!converged(&s, &r, &cfg));
    for g in r.iter_mut() {
        *g = 900.0;
    }
    let (s2, _) = perfect(196);
    assert!(converged(&s2, &r, &cfg), "threshold is inclusive");

    // Rate stability: failures inside the long window but outside the short
    // one mean the success rate is still moving.
    let (mut s, r) = perfect(196);
    for i in 0..4 {
        s[i] = false;
    }
    assert!(!converged(&s, &r, &cfg));

    // Once those failures age out of the long window, the test passes.
    let (mut s, r) = perfect(200);
    for i in 0..4 {
        s[i] = false;
    }
    assert!(converged(&s, &r, &cfg));
}

#[test]
fn budget_exhaustion_keeps_the_best_snapshot_and_flags_it() {
    let mut ipt = novelty_world(NoveltyId::AtbEasy, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (plan, at) = match run_pass(&mut ipt, &mut rng).expect("pass runs") {
        PassEnd::NeedsDiscovery { plan, at } => (plan, at),
        other => panic!("expected impasse, got {other:?}"),
    };
    let mut cfg = DiscoveryConfig::default();
    cfg.e_max = 3;
    let (executor, log) =
        discover_executor(&mut ipt, &plan, at, Strategy::KgeUcb, &cfg, 7).expect("training runs");
    assert!(!executor.converged, "three episodes cannot converge");
    assert_eq!(executor.episodes, 3);
    assert_eq!(log.episodes.len(), 3);
    assert_eq!(log.operator, "break");
    assert_eq!(executor.operator, "break");
    assert_eq!(executor.strategy, Strategy::KgeUcb);
    assert_eq!(executor.clauses.len(), 2);
    assert_eq!(executor.actions.len(), ipt.actions.len(), "no learned entries yet");
    let logged: u64 = log.episodes.iter().map(|e| e.steps).sum();
    assert_eq!(executor.training_steps, logged);
    assert!(log.episodes[0].epsilon > log.episodes[2].epsilon, "schedule decays");
}

#[test]
fn adaptation_learns_the_tool_dependency_recovery() {
    let mut ipt = novelty_world(NoveltyId::AtbEasy, 42);
    let cfg = DiscoveryConfig::default();
    let started = std::time::Instant::now();
    let report = rapid_learn(&mut ipt, Strategy::KgeUcb, &cfg, 1).expect("adaptation runs");
    eprintln!(
        "tool-dependency adaptation: success={} passes={} steps={} episodes={:?} unconverged={} in {:?}",
        report.success,
        report.passes,
        report.adaptation_steps,
        report.logs.iter().map(|l| l.episodes.len()).collect::<Vec<_>>(),
        report.unconverged,
        started.elapsed()
    );
    assert!(report.success, "failure: {:?}", report.failure);
    assert_eq!(report.discoveries, ["break"]);
    assert_eq!(report.unconverged, 0);

    let mut wins = 0;
    let mut recoveries = 0;
    for seed in 0..10 {
        let eval = evaluate(&mut ipt, 500 + seed).expect("evaluation runs");
        if eval.success {
            wins += 1;
            recoveries += eval.recoveries;
        }
    }
    eprintln!("post-adaptation evaluation: {wins}/10 wins, {recoveries} recoveries");
    assert!(wins >= 9, "trained scenario should solve fresh placements, got {wins}/10");
    assert!(recoveries >= wins, "each win bridges the break impasse at least once");
}
