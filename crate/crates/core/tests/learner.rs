//! Learner tests: frozen-value oracles for the exploration overlays, the
//! decay schedule, REINFORCE bookkeeping, and a central finite-difference
//! check of the hand-written backprop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rapidlearn_core::learner::{
    argmax, batch_objective, bias_uab, bias_ucb, decayed, normalize, returns_to_go,
    select_action, softmax, update_network, DimensionMismatch, EmptyBiasSet, EmptyBuffer,
    EpisodeBuffer, ExplorationState, LearnerConfig, PolicyNet, Strategy, Transition,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn strategy_names_round_trip() {
    for k in [Strategy::Eg, Strategy::KgeUcb, Strategy::KgeUab] {
        assert_eq!(Strategy::parse(k.as_str()), Some(k));
    }
    assert_eq!(Strategy::parse("greedy"), None);
}

#[test]
fn zero_network_yields_the_uniform_distribution() {
    let net = PolicyNet::zeros(7, 24, 5);
    let p = net.probs(&[0.3; 7]).unwrap();
    for v in &p {
        assert!((v - 0.2).abs() < 1e-12);
    }
    assert_eq!(softmax(&[0.0, 0.0]), [0.5, 0.5]);
}

#[test]
fn probabilities_normalize_and_are_deterministic_per_seed() {
    let obs: Vec<f64> = (0..11).map(|i| (i as f64) / 10.0).collect();
    let a = PolicyNet::new(11, 24, 6, &mut rng(42)).probs(&obs).unwrap();
    let b = PolicyNet::new(11, 24, 6, &mut rng(42)).probs(&obs).unwrap();
    assert_eq!(a, b, "same seed must give bit-identical output");
    let sum: f64 = a.iter().sum();
    assert!((sum - 1.0).abs() < 1e-9);
    assert!(a.iter().all(|p| *p >= 0.0));

    let err = PolicyNet::zeros(4, 2, 3).probs(&[0.0; 5]).unwrap_err();
    assert_eq!(err, DimensionMismatch { expected: 4, got: 5 });
}

#[test]
fn ucb_bias_matches_the_hand_computed_value() {
    // 0.5 ± 0.0005·√(ln 3 / 1)
    let out = bias_ucb(&[0.5, 0.5], &[0], &[1, 1], 3, 0.0005);
    assert!((out[0] - 0.500524).abs() < 1e-6, "got {}", out[0]);
    assert!((out[1] - 0.499476).abs() < 1e-6, "got {}", out[1]);

    // t = 1 → ln t = 0 → no change.
    let out = bias_ucb(&[0.3, 0.7], &[0], &[5, 9], 1, 0.0005);
    assert_eq!(out, [0.3, 0.7]);
}

#[test]
fn ucb_pulls_the_argmax_into_the_biased_set() {
    let probs = [0.25; 4];
    let counts = [7, 7, 7, 7];
    for target in 0..4 {
        let out = bias_ucb(&probs, &[target], &counts, 50, 0.0005);
        assert_eq!(argmax(&out), target);
    }
}

#[test]
fn uab_bias_matches_the_hand_computed_values() {
    let out = bias_uab(&[0.5, 0.5], &[0], 2.0).unwrap();
    assert!((out[0] - 0.75).abs() < 1e-12);
    assert!((out[1] - 0.25).abs() < 1e-12);

    let out = bias_uab(&[0.2, 0.3, 0.5], &[2], 2.0).unwrap();
    assert!((out[0] - 0.1).abs() < 1e-12);
    assert!((out[1] - 0.15).abs() < 1e-12);
    assert!((out[2] - 0.75).abs() < 1e-12);

    // Biasing every action is the identity (mass S = 1).
    let out = bias_uab(&[0.2, 0.3, 0.5], &[0, 1, 2], 2.0).unwrap();
    for (a, b) in out.iter().zip([0.2, 0.3, 0.5]) {
        assert!((a - b).abs() < 1e-12);
    }

    assert_eq!(bias_uab(&[1.0, 0.0], &[1], 2.0), Err(EmptyBiasSet));
}

#[test]
fn uab_preserves_normalization_over_a_thousand_random_draws() {
    let mut r = rng(9);
    for _ in 0..1000 {
        let n = 2 + (rand::Rng::gen_range(&mut r, 0..10) as usize);
        let raw: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut r, 0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let k = 1 + (rand::Rng::gen_range(&mut r, 0..n) as usize);
        let biased: Vec<usize> = (0..k).collect();
        let out = bias_uab(&probs, &biased, 2.0).unwrap();
        let sum: f64 = out.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        assert!(out.iter().all(|p| *p >= 0.0));
    }
}

#[test]
fn zero_epsilon_samples_straight_from_the_policy() {
    let cfg = LearnerConfig::default();
    let mut expl = ExplorationState::new(Strategy::Eg, vec![0], 2, 0.0);
    let mut r = rng(1);
    let mut freq = [0usize; 2];
    for _ in 0..10_000 {
        freq[select_action(&[0.1, 0.9], &mut expl, &cfg, &mut r)] += 1;
    }
    let rate = freq[1] as f64 / 10_000.0;
    assert!((rate - 0.9).abs() < 0.02, "rate {rate}");
    assert_eq!(expl.counts[0] + expl.counts[1], 10_002);
    assert_eq!(expl.t, 10_001);
}

#[test]
fn degenerate_weights_fall_back_to_the_argmax() {
    use rapidlearn_core::learner::sample_index;
    let mut r = rng(9);
    assert_eq!(sample_index(&[0.0, 0.0, 0.0], &mut r), 0);
    assert_eq!(sample_index(&[f64::NAN, 0.3, 0.0], &mut r), 1);
    for _ in 0..50 {
        assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut r), 1);
    }
}

#[test]
fn uab_exploration_drifts_onto_the_bumped_action() {
    let cfg = LearnerConfig::default();
    let mut expl = ExplorationState::new(Strategy::KgeUab, vec![0], 2, 1.0);
    let mut r = rng(2);
    // Each exploring draw halves the unbumped action's scale, so its total
    // expected pick count over the whole run is Σ 2^-k ≈ 1; the bumped
    // action dominates from the first few draws on.
    let mut picked = [0usize; 2];
    for _ in 0..50 {
        picked[select_action(&[0.5, 0.5], &mut expl, &cfg, &mut r)] += 1;
    }
    assert!(picked[0] >= 45, "bumped action picked {}/50", picked[0]);
    assert!(expl.scale[0] > 1.0 && expl.scale[1] < 0.1);
}

#[test]
fn eg_exploration_is_uniform() {
    let cfg = LearnerConfig::default();
    let mut expl = ExplorationState::new(Strategy::Eg, vec![], 4, 1.0);
    let mut r = rng(3);
    let mut freq = [0usize; 4];
    for _ in 0..10_000 {
        freq[select_action(&[0.7, 0.1, 0.1, 0.1], &mut expl, &cfg, &mut r)] += 1;
    }
    for f in freq {
        let rate = f as f64 / 10_000.0;
        assert!((rate - 0.25).abs() < 0.02, "rate {rate}");
    }
}

#[test]
fn ties_break_to_the_lowest_index() {
    assert_eq!(argmax(&[0.4, 0.4, 0.2]), 0);
    assert_eq!(argmax(&[0.1, 0.45, 0.45]), 1);
}

#[test]
fn decay_schedule_matches_the_closed_form() {
    // ε_n = min + (max−min)·exp(n·ln(0.01)/2000)
    assert!((decayed(0.3, 0.05, 0, 2000.0) - 0.3).abs() < 1e-12);
    let expected_500 = 0.05 + 0.25 * (500.0 * 0.01f64.ln() / 2000.0).exp();
    assert!((decayed(0.3, 0.05, 500, 2000.0) - expected_500).abs() < 1e-12);
    assert!((decayed(0.3, 0.05, 2000, 2000.0) - 0.0525).abs() < 1e-12);
    let mut last = f64::INFINITY;
    for n in 0..5000 {
        let e = decayed(0.3, 0.05, n, 2000.0);
        assert!(e <= last && (0.05..=0.3).contains(&e));
        last = e;
    }
    assert!(decayed(0.3, 0.05, 100_000, 2000.0) - 0.05 < 1e-9);
}

#[test]
fn returns_to_go_respect_episode_boundaries() {
    let steps: Vec<Transition> = [(1.0, false), (2.0, false), (3.0, true), (4.0, false), (5.0, true)]
        .into_iter()
        .map(|(reward, done)| Transition { obs: vec![], action: 0, reward, done })
        .collect();
    let g = returns_to_go(&steps, 0.5);
    assert_eq!(g, vec![2.75, 3.5, 3.0, 6.5, 5.0]);
}

#[test]
fn normalization_centers_and_scales() {
    let mut g = vec![10.0, 20.0, 30.0];
    normalize(&mut g);
    let mean: f64 = g.iter().sum::<f64>() / 3.0;
    assert!(mean.abs() < 1e-9);
    assert!((g[2] - g[0] - 2.0 * (g[1] - g[0])).abs() < 1e-9); // equal spacing kept
}

#[test]
fn zero_return_single_step_leaves_parameters_unchanged() {
    let cfg = LearnerConfig::default();
    let mut net = PolicyNet::new(3, 4, 2, &mut rng(7));
    let before = net.flat();
    let mut buf = EpisodeBuffer::default();
    buf.push(vec![0.1, 0.2, 0.3], 1, 0.0, true);
    update_network(&mut net, &mut buf, &cfg).unwrap();
    assert_eq!(net.flat(), before);
    assert!(buf.is_empty(), "buffer must be cleared");
    assert_eq!(update_network(&mut net, &mut buf, &cfg), Err(EmptyBuffer));
}

#[test]
fn positive_return_raises_the_chosen_action_probability() {
    let cfg = LearnerConfig::default();
    let mut net = PolicyNet::new(3, 4, 2, &mut rng(8));
    let obs = vec![0.5, -0.2, 0.9];
    let before = net.probs(&obs).unwrap()[0];
    let mut buf = EpisodeBuffer::default();
    buf.push(obs.clone(), 0, 25.0, true);
    update_network(&mut net, &mut buf, &cfg).unwrap();
    let after = net.probs(&obs).unwrap()[0];
    assert!(after > before, "{after} should exceed {before}");
}

#[test]
fn analytic_gradient_matches_central_finite_differences() {
    let mut r = rng(11);
    for case in 0..20 {
        let (n_in, n_hidden, n_out) = (5, 4, 3);
        let net = PolicyNet::new(n_in, n_hidden, n_out, &mut r);
        let steps: Vec<Transition> = (0..6)
            .map(|_| Transition {
                obs: (0..n_in).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect(),
                action: rand::Rng::gen_range(&mut r, 0..n_out),
                reward: rand::Rng::gen_range(&mut r, -2.0..2.0),
                done: rand::Rng::gen_range(&mut r, 0.0..1.0) < 0.3,
            })
            .collect();
        let mut returns = returns_to_go(&steps, 0.98);
        normalize(&mut returns);

        // Analytic gradient: apply the update with α = 1 and diff the flats.
        let mut updated = net.clone();
        let mut buf = EpisodeBuffer { steps: steps.clone() };
        // update_network normalizes internally (len ≥ 2), matching `returns`.
        let cfg = LearnerConfig { alpha: 1.0, gamma: 0.98, ..LearnerConfig::default() };
        update_network(&mut updated, &mut buf, &cfg).unwrap();
        let theta = net.flat();
        let grad: Vec<f64> =
            updated.flat().iter().zip(&theta).map(|(a, b)| a - b).collect();

        // Probe a spread of coordinates with central differences.
        let h = 1e-5;
        for probe in 0..15 {
            let i = (probe * 7 + case * 13) % theta.len();
            let mut plus = theta.clone();
            plus[i] += h;
            let mut minus = theta.clone();
            minus[i] -= h;
            let jp = batch_objective(
                &PolicyNet::from_flat(n_in, n_hidden, n_out, &plus).unwrap(),
                &steps,
                &returns,
            );
            let jm = batch_objective(
                &PolicyNet::from_flat(n_in, n_hidden, n_out, &minus).unwrap(),
                &steps,
                &returns,
            );
            let fd = (jp - jm) / (2.0 * h);
            let scale = grad[i].abs().max(fd.abs()).max(1e-6);
            assert!(
                (grad[i] - fd).abs() / scale < 1e-4,
                "case {case} coord {i}: analytic {} vs fd {fd}",
                grad[i]
            );
        }
    }
}

#[test]
fn flat_round_trips_through_from_flat() {
    let net = PolicyNet::new(6, 5, 4, &mut rng(13));
    let back = PolicyNet::from_flat(6, 5, 4, &net.flat()).unwrap();
    assert_eq!(net.flat(), back.flat());
    assert!(PolicyNet::from_flat(6, 5, 4, &[0.0; 3]).is_none());
}
