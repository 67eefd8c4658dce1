//! End-to-end checks for the PDDL layer: parsing, validation, grounding,
//! applicability, application, and serialization round-trips.

use rapidlearn_core::symbolic::{
    ground, parse_domain, parse_problem, print_domain, print_problem, validate_domain,
    Condition, GroundError, GroundTask, PddlError, SymbolicState, DOMAIN_PDDL,
};

/// The nine objects every generated pre-novelty problem declares.
const BASE_OBJECTS: [&str; 9] = [
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

fn base_problem_text() -> String {
    let mut s = String::new();
    s.push_str("(define (problem adapt)\n  (:domain gridworld_crafting)\n  (:objects ");
    for o in BASE_OBJECTS {
        s.push_str(o);
        s.push(' ');
    }
    s.push_str("- physobj)\n  (:init\n    (facing air)\n    (holding air)\n");
    s.push_str("    (= (world tree_log) 6)\n    (= (world crafting_table) 1)\n");
    s.push_str("    (= (world air) 93)\n  )\n");
    s.push_str("  (:goal (>= (inventory pogo_stick) 1))\n)\n");
    s
}

fn base_task() -> GroundTask {
    let mut domain = parse_domain(DOMAIN_PDDL).expect("bundled domain parses");
    validate_domain(&mut domain);
    let problem = parse_problem(&base_problem_text(), &domain).expect("problem parses");
    GroundTask::from_problem(&domain, &problem).expect("task grounds")
}

#[test]
fn bundled_domain_has_expected_shape() {
    let domain = parse_domain(DOMAIN_PDDL).expect("bundled domain parses");
    let names: Vec<&str> = domain.operators.iter().map(|o| o.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "approach",
            "crafttree_tap",
            "craftplank",
            "break",
            "craftstick",
            "extractrubber",
            "craftpogo_stick",
            "select"
        ]
    );
    let preds: Vec<&str> = domain.predicates.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(preds, ["holding", "floating", "facing"]);
    let funcs: Vec<&str> = domain.functions.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(funcs, ["world", "inventory"]);
}

#[test]
fn degenerate_domain_parses() {
    let src = "(define (domain tiny) (:predicates (p)))";
    let domain = parse_domain(src).expect("degenerate domain parses");
    assert!(domain.operators.is_empty());
    assert_eq!(domain.predicates.len(), 1);
}

#[test]
fn misspelled_action_field_is_an_error_with_location() {
    let src = DOMAIN_PDDL.replace(":effect", ":effcet");
    match parse_domain(&src) {
        Err(PddlError::Unsupported { line, construct, .. }) => {
            assert!(construct.contains(":effcet"), "names the offending token: {construct}");
            assert!(line > 1, "points into the file, not at the start");
        }
        other => panic!("expected an unsupported-construct error, got {other:?}"),
    }
}

#[test]
fn unknown_object_type_is_an_error() {
    let domain = parse_domain(DOMAIN_PDDL).unwrap();
    let src = "(define (problem p) (:domain gridworld_crafting) \
               (:objects smaug - dragon) (:init) (:goal (facing smaug)))";
    match parse_problem(src, &domain) {
        Err(PddlError::Semantic { message }) => {
            assert!(message.contains("dragon"), "mentions the unknown type: {message}");
        }
        other => panic!("expected a semantic error, got {other:?}"),
    }
}

#[test]
fn validator_tightens_underspecified_consumption() {
    let mut domain = parse_domain(DOMAIN_PDDL).unwrap();
    let warnings = validate_domain(&mut domain);
    // Two repairs: the tap recipe requires 4 planks but consumes 5, and
    // `break` decrements the world log count without bounding it.
    assert_eq!(warnings.len(), 2);
    assert_eq!(warnings[0].operator, "crafttree_tap");
    assert_eq!(warnings[0].old_bound, Some(4));
    assert_eq!(warnings[0].new_bound, 5);
    assert_eq!(warnings[1].operator, "break");
    assert_eq!(warnings[1].fluent, "world tree_log");
    assert_eq!(warnings[1].old_bound, None);
    assert_eq!(warnings[1].new_bound, 1);
    // The repaired domain validates cleanly.
    assert!(validate_domain(&mut domain).is_empty());
    let op = domain.operator("crafttree_tap").unwrap();
    let plank_bound = op
        .preconditions
        .iter()
        .find_map(|c| match c {
            Condition::GreaterEq { fluent, bound } if fluent.head == "inventory" => {
                fluent.args.first().and_then(|t| t.as_const()).filter(|a| *a == "plank")?;
                Some(*bound)
            }
            _ => None,
        })
        .unwrap();
    assert_eq!(plank_bound, 5);
}

#[test]
fn grounding_counts_over_nine_objects() {
    let task = base_task();
    let approaches = task.operators.iter().filter(|o| o.schema == "approach").count();
    let selects = task.operators.iter().filter(|o| o.schema == "select").count();
    // 9×9 ordered pairs minus the 9 self-pairs.
    assert_eq!(approaches, 72);
    assert_eq!(selects, 9);
    for name in ["crafttree_tap", "craftplank", "break", "craftstick", "extractrubber", "craftpogo_stick"] {
        assert_eq!(task.operators.iter().filter(|o| o.schema == name).count(), 1, "{name}");
    }
    assert_eq!(task.operators.len(), 72 + 9 + 6);
    // Fact table: holding/floating/facing over 9 physobj.
    assert_eq!(task.facts.len(), 27);
    // Fluent table: world/inventory over 9 objects.
    assert_eq!(task.fluents.len(), 18);
}

#[test]
fn grounding_with_no_objects_keeps_parameterless_operators() {
    let mut domain = parse_domain(DOMAIN_PDDL).unwrap();
    validate_domain(&mut domain);
    let task = ground(&domain, &[]).expect("grounds over the empty universe");
    assert!(task.operators.iter().all(|o| o.args.is_empty()));
    assert_eq!(task.operators.len(), 6);
}

#[test]
fn applicability_checks_positive_negative_and_numeric() {
    let task = base_task();
    let break_id = task.operator_id("break").unwrap();
    let craftplank_id = task.operator_id("craftplank").unwrap();

    // Fresh start: facing air, nothing in the inventory.
    let s0 = task.s0.clone();
    assert!(!task.applicable(&s0, &task.operators[break_id]), "break needs facing tree_log");
    assert!(!task.applicable(&s0, &task.operators[craftplank_id]), "craftplank needs a log");

    // One log in the inventory unlocks craftplank.
    let mut s = s0.clone();
    s.fluents[task.fluent_id("inventory", &["tree_log"]).unwrap()] = 1;
    assert!(task.applicable(&s, &task.operators[craftplank_id]));

    // Facing a log unlocks break — unless the log is floating.
    let mut s = s0.clone();
    s.facts.clear(task.fact_id("facing", &["air"]).unwrap());
    s.facts.set(task.fact_id("facing", &["tree_log"]).unwrap());
    assert!(task.applicable(&s, &task.operators[break_id]));
    s.facts.set(task.fact_id("floating", &["tree_log"]).unwrap());
    assert!(!task.applicable(&s, &task.operators[break_id]), "negated precondition");
}

#[test]
fn apply_matches_hand_computed_transitions() {
    let task = base_task();

    // Breaking a tree: gain a log, the cell becomes air, facing flips to air.
    let mut s = SymbolicState {
        facts: task.s0.facts.clone(),
        fluents: vec![0; task.fluents.len()],
    };
    s.facts.clear(task.fact_id("facing", &["air"]).unwrap());
    s.facts.set(task.fact_id("facing", &["tree_log"]).unwrap());
    s.fluents[task.fluent_id("world", &["tree_log"]).unwrap()] = 5;
    let break_op = &task.operators[task.operator_id("break").unwrap()];
    let next = task.apply(&s, break_op).unwrap();
    assert!(next.facts.get(task.fact_id("facing", &["air"]).unwrap()));
    assert!(!next.facts.get(task.fact_id("facing", &["tree_log"]).unwrap()));
    assert_eq!(next.fluents[task.fluent_id("inventory", &["tree_log"]).unwrap()], 1);
    assert_eq!(next.fluents[task.fluent_id("world", &["air"]).unwrap()], 1);
    assert_eq!(next.fluents[task.fluent_id("world", &["tree_log"]).unwrap()], 4);

    // Crafting sticks: two planks become four sticks.
    let mut s = task.s0.clone();
    s.fluents[task.fluent_id("inventory", &["plank"]).unwrap()] = 2;
    let craftstick = &task.operators[task.operator_id("craftstick").unwrap()];
    let next = task.apply(&s, craftstick).unwrap();
    assert_eq!(next.fluents[task.fluent_id("inventory", &["plank"]).unwrap()], 0);
    assert_eq!(next.fluents[task.fluent_id("inventory", &["stick"]).unwrap()], 4);

    // Applying in a state that fails the precondition is an error.
    match task.apply(&task.s0, craftstick) {
        Err(GroundError::InapplicableOperator { operator }) => assert_eq!(operator, "craftstick"),
        other => panic!("expected InapplicableOperator, got {other:?}"),
    }
}

#[test]
fn effects_met_distinguishes_real_transitions_from_no_ops() {
    let task = base_task();
    let craftplank = &task.operators[task.operator_id("craftplank").unwrap()];
    let mut pre = task.s0.clone();
    pre.fluents[task.fluent_id("inventory", &["tree_log"]).unwrap()] = 1;
    let post = task.apply(&pre, craftplank).unwrap();
    assert!(task.effects_met(&pre, &post, craftplank));
    // A no-op transition (world ignored the command) leaves the effects unmet.
    assert!(!task.effects_met(&pre, &pre, craftplank));
}

#[test]
fn serialization_round_trips() {
    let domain = parse_domain(DOMAIN_PDDL).unwrap();
    let reparsed = parse_domain(&print_domain(&domain)).expect("printed domain parses");
    assert_eq!(domain, reparsed);

    let problem = parse_problem(&base_problem_text(), &domain).unwrap();
    let reparsed = parse_problem(&print_problem(&problem), &domain).expect("printed problem parses");
    assert_eq!(problem, reparsed);
}

#[test]
fn apply_keeps_fluents_non_negative_and_facing_unique() {
    // Walk the optimal crafting line by hand and watch the invariants.
    let task = base_task();
    let plan = [
        "approach air tree_log",
        "break",
        "approach air tree_log",
        "break",
        "craftplank",
        "craftplank",
        "craftstick",
        "approach air crafting_table",
        "crafttree_tap",
        "select tree_tap",
        "approach crafting_table tree_log",
        "extractrubber",
        "break",
        "craftplank",
        "craftstick",
        "approach air crafting_table",
        "craftpogo_stick",
    ];
    let mut s = task.s0.clone();
    for step in plan {
        let op = &task.operators[task.operator_id(step).unwrap_or_else(|| panic!("{step}"))];
        s = task.apply(&s, op).unwrap_or_else(|e| panic!("{step}: {e}"));
        assert!(s.fluents.iter().all(|v| *v >= 0), "non-negative fluents after {step}");
        let facing_count = task
            .facts
            .iter()
            .enumerate()
            .filter(|(i, a)| a.head == "facing" && s.facts.get(*i))
            .count();
        assert_eq!(facing_count, 1, "exactly one facing atom after {step}");
    }
    assert!(task.satisfies_goal(&s), "the hand plan reaches the goal");
}
