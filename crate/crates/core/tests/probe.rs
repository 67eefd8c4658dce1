//! Temporary diagnostics for exploration dynamics (not part of the suite).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rapidlearn_core::bridge::{AgentAction, StretchIPT};
use rapidlearn_core::discovery::{
    plannable_states, reach_failed_operator, terminal_check, DiscoveryConfig,
};
use rapidlearn_core::learner::{select_action, ExplorationState, PolicyNet, Strategy};
use rapidlearn_core::novelty::{catalogue, NoveltyId};
use rapidlearn_core::world::base_actions;

#[test]
#[ignore]
fn dump_training_trajectory() {
    use rapidlearn_core::discovery::discover_executor;
    let spec = catalogue().into_iter().find(|n| n.id == NoveltyId::AtbEasy).unwrap();
    let mut ipt = StretchIPT::build(Some(&spec), 42).unwrap();
    let s0 = ipt.detect();
    let plan = ipt.plan_from_state(&s0).unwrap();
    let at = plan
        .steps
        .iter()
        .position(|op| ipt.task.operators[*op].schema == "break")
        .unwrap();
    let mut cfg = DiscoveryConfig::default();
    cfg.e_max = 300;
    let (exec, log) = discover_executor(&mut ipt, &plan, at, Strategy::KgeUcb, &cfg, 99).unwrap();
    let marks: String = log
        .episodes
        .iter()
        .map(|e| if e.success { '#' } else { '.' })
        .collect();
    println!("successes ({} eps):", log.episodes.len());
    for (i, chunk) in marks.as_bytes().chunks(60).enumerate() {
        println!("{:4} {}", i * 60, core::str::from_utf8(chunk).unwrap());
    }
    let wins = log.episodes.iter().filter(|e| e.success).count();
    println!("total wins: {wins} converged={}", exec.converged);
    let mean_steps: f64 = log.episodes.iter().map(|e| e.steps as f64).sum::<f64>()
        / log.episodes.len() as f64;
    println!("mean episode steps: {mean_steps:.1}");
}

#[test]
#[ignore]
fn diagnose_reach_failures() {
    use rapidlearn_core::bridge::run_pass;
    for id in [NoveltyId::FctHard, NoveltyId::RtHard, NoveltyId::FctEasy] {
        let spec = catalogue().into_iter().find(|n| n.id == id).unwrap();
        for seed in 0..6u64 {
            let mut ipt = StretchIPT::build(Some(&spec), 42).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Mirror the discovery entry: find the impasse, then replay.
            let target = match run_pass(&mut ipt, &mut rng).unwrap() {
                rapidlearn_core::bridge::PassEnd::NeedsDiscovery { plan, at } => {
                    ipt.task.operators[plan.steps[at]].display_name()
                }
                other => {
                    println!("{:9} seed {seed}: pass = {other:?}", id.as_str());
                    continue;
                }
            };
            // Manual reach walk with step-by-step reporting on error.
            match reach_failed_operator(&mut ipt, &target, seed) {
                Ok(()) => println!("{:9} seed {seed}: reach ok (target {target})", id.as_str()),
                Err(e) => {
                    println!("{:9} seed {seed}: reach ERR {e}", id.as_str());
                    // Replay manually to find the failing operator.
                    ipt.reset(seed).unwrap();
                    let s = ipt.detect();
                    let plan = ipt.plan_from_state(&s).unwrap();
                    for &op_id in &plan.steps {
                        let name = ipt.task.operators[op_id].display_name();
                        match ipt.execute_operator(op_id) {
                            Ok(o) if o.success => continue,
                            Ok(_) => {
                                println!("          first effect-failure at `{name}`");
                                break;
                            }
                            Err(e2) => {
                                println!("          hard error at `{name}`: {e2}");
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
#[ignore]
fn sweep_all_scenarios() {
    use rapidlearn_core::bridge::{evaluate, rapid_learn};
    use rapidlearn_core::discovery::DiscoveryConfig;
    let cfg = DiscoveryConfig::default();
    for spec in catalogue() {
        for strategy in [Strategy::KgeUcb, Strategy::KgeUab, Strategy::Eg] {
            let t0 = std::time::Instant::now();
            let mut ipt = StretchIPT::build(Some(&spec), 42).unwrap();
            let report = match rapid_learn(&mut ipt, strategy, &cfg, 1) {
                Ok(r) => r,
                Err(e) => {
                    println!(
                        "{:12} {:7?} ERROR {e}",
                        spec.id.as_str(),
                        strategy
                    );
                    continue;
                }
            };
            let mut wins = 0;
            let evals = 20;
            for i in 0..evals {
                let r = evaluate(&mut ipt, 10_000 + i).unwrap();
                if r.success {
                    wins += 1;
                }
            }
            println!(
                "{:12} {:7?} adapt={} tta={:6} passes={} disc={:?} unconv={} eval={}/{} in {:.1}s",
                spec.id.as_str(),
                strategy,
                report.success,
                report.adaptation_steps,
                report.passes,
                report.discoveries,
                report.unconverged,
                wins,
                evals,
                t0.elapsed().as_secs_f64()
            );
        }
    }
}

#[test]
#[ignore]
fn dump_update_effects() {
    use rapidlearn_core::learner::{update_network, EpisodeBuffer, Transition};
    let spec = catalogue().into_iter().find(|n| n.id == NoveltyId::AtbEasy).unwrap();
    let mut ipt = StretchIPT::build(Some(&spec), 42).unwrap();
    let s0 = ipt.detect();
    let plan = ipt.plan_from_state(&s0).unwrap();
    let at = plan
        .steps
        .iter()
        .position(|op| ipt.task.operators[*op].schema == "break")
        .unwrap();
    let clauses = plannable_states(&ipt.task, &plan, at).unwrap();
    let cfg = DiscoveryConfig::default();

    let actions: Vec<AgentAction> =
        ipt.actions.iter().map(|a| AgentAction::Primitive(*a)).collect();
    let mut biased: Vec<usize> = (base_actions().len()..ipt.actions.len()).collect();
    biased.push(3);
    biased.sort_unstable();

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let obs_len = ipt.world.observe().len();
    let mut policy = PolicyNet::new(obs_len, cfg.learner.hidden, actions.len(), &mut rng);
    let mut expl =
        ExplorationState::new(Strategy::KgeUcb, biased.clone(), actions.len(), 0.3);
    let mut buffer = EpisodeBuffer::default();

    for e in 0..40u64 {
        reach_failed_operator(&mut ipt, "break", e * 7 + 1).unwrap();
        let probe_obs = ipt.world.observe();
        let probe_probs = policy.probs(&probe_obs).unwrap();
        let top = probe_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let entropy: f64 =
            -probe_probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>();

        expl.begin_episode();
        let mut transitions: Vec<Transition> = Vec::new();
        let mut success = false;
        let mut ret = 0.0;
        for _ in 0..ipt.world.config().horizon {
            if ipt.world.episode_over() {
                break;
            }
            let obs = ipt.world.observe();
            let probs = policy.probs(&obs).unwrap();
            let choice = select_action(&probs, &mut expl, &cfg.learner, &mut rng);
            let steps = ipt.execute_agent_action(&actions[choice], &mut rng).unwrap_or(1);
            if let Some((reward, s)) = terminal_check(&mut ipt, &clauses, &cfg) {
                transitions.push(Transition { obs, action: choice, reward, done: true });
                success = s;
                ret = transitions.iter().map(|t| t.reward).sum();
                break;
            }
            let done = ipt.world.episode_over();
            transitions.push(Transition {
                obs,
                action: choice,
                reward: -(steps as f64),
                done,
            });
            if done {
                break;
            }
        }
        if !success {
            if let Some(last) = transitions.last_mut() {
                last.done = true;
            }
            ret = transitions.iter().map(|t| t.reward).sum();
        }
        let n = transitions.len();
        buffer.steps.extend(transitions);
        println!(
            "ep {e:3} success={success} ret={ret:8.1} len={n:3} | at-tree: top={top:.4} H={entropy:.3} break={:.4} axe={:.4}",
            probe_probs[3], probe_probs[17]
        );
        if (e + 1) % 10 == 0 {
            update_network(&mut policy, &mut buffer, &cfg.learner).unwrap();
            let w = policy.flat();
            let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let wmax = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!("  -- update: |w|={norm:.2} max={wmax:.3}");
        }
    }
}

#[test]
#[ignore]
fn dump_episode_dynamics() {
    let spec = catalogue().into_iter().find(|n| n.id == NoveltyId::AtbEasy).unwrap();
    let mut ipt = StretchIPT::build(Some(&spec), 42).unwrap();
    let s0 = ipt.detect();
    let plan = ipt.plan_from_state(&s0).unwrap();
    let at = plan
        .steps
        .iter()
        .position(|op| ipt.task.operators[*op].schema == "break")
        .unwrap();
    let clauses = plannable_states(&ipt.task, &plan, at).unwrap();
    let cfg = DiscoveryConfig::default();

    let actions: Vec<AgentAction> =
        ipt.actions.iter().map(|a| AgentAction::Primitive(*a)).collect();
    let mut biased: Vec<usize> = (base_actions().len()..ipt.actions.len()).collect();
    biased.push(3); // break
    biased.sort_unstable();
    println!("actions: {:?}", actions.iter().map(|a| a.name()).collect::<Vec<_>>());
    println!("biased: {biased:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let obs_len = ipt.world.observe().len();
    println!("obs_len: {obs_len}");
    let policy = PolicyNet::new(obs_len, cfg.learner.hidden, actions.len(), &mut rng);
    let mut expl =
        ExplorationState::new(Strategy::KgeUcb, biased.clone(), actions.len(), 0.3);

    reach_failed_operator(&mut ipt, "break", 1).unwrap();
    let obs = ipt.world.observe();
    println!(
        "obs sample: min={:.3} max={:.3} mean={:.3}",
        obs.iter().cloned().fold(f64::INFINITY, f64::min),
        obs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        obs.iter().sum::<f64>() / obs.len() as f64
    );
    let probs = policy.probs(&obs).unwrap();
    let mut sorted: Vec<(usize, f64)> = probs.iter().cloned().enumerate().collect();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    println!("top probs: {:?}", &sorted[..6.min(sorted.len())]);
    println!("delta probs: break={:.4} select_axe={:.4}", probs[3], probs[17]);

    expl.begin_episode();
    for step in 0..120 {
        let obs = ipt.world.observe();
        let probs = policy.probs(&obs).unwrap();
        let choice = select_action(&probs, &mut expl, &cfg.learner, &mut rng);
        let steps = ipt.execute_agent_action(&actions[choice], &mut rng).unwrap();
        let done = terminal_check(&mut ipt, &clauses, &cfg);
        if step < 40 || done.is_some() || step % 10 == 0 {
            println!(
                "step {step:3} choice={:2} ({}) world_steps={steps} shift[3]={:+.4} shift[17]={:+.4} pref3={:+.4} pref17={:+.4} top_pref={:.4} done={done:?}",
                choice,
                actions[choice].name(),
                expl.shift[3],
                expl.shift[17],
                probs[3] + expl.shift[3],
                probs[17] + expl.shift[17],
                probs
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p * expl.scale[i] + expl.shift[i])
                    .fold(f64::NEG_INFINITY, f64::max),
            );
        }
        if done.is_some() {
            println!("TERMINAL: {done:?}");
            break;
        }
        if ipt.world.episode_over() {
            println!("horizon");
            break;
        }
    }
}
