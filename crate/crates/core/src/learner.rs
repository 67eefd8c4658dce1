//! Policy-gradient learner: a single-hidden-layer softmax policy trained
//! with REINFORCE, plus three exploration overlays — ε-greedy (EG),
//! count-based bias (KGE-UCB), and uniform action biasing (KGE-UAB).
//!
//! Everything here is pure numerics over `f64` vectors; the environment and
//! reward live elsewhere. Action choice is argmax-based (ties to the lowest
//! index) so a trained policy replays deterministically.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::util::fmath;

/// Exploration strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// ε-greedy: with probability ε pick a uniformly random action.
    Eg,
    /// With probability ε, add a count-based confidence bonus to the biased
    /// action set (and subtract it elsewhere), then argmax.
    KgeUcb,
    /// With probability ε, multiplicatively bump the biased action set's
    /// probability mass, then argmax.
    KgeUab,
}

impl Strategy {
    /// Stable name used on the command line and in result files.
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Eg => "EG",
            Strategy::KgeUcb => "KGE-UCB",
            Strategy::KgeUab => "KGE-UAB",
        }
    }

    /// Parses a strategy name as printed by [`Strategy::as_str`].
    pub fn parse(s: &str) -> Option<Strategy> {
        [Strategy::Eg, Strategy::KgeUcb, Strategy::KgeUab]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

/// Learner hyperparameters (defaults match the reference configuration).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Hidden layer width.
    pub hidden: usize,
    /// Learning rate α.
    pub alpha: f64,
    /// Discount γ for returns-to-go.
    pub gamma: f64,
    /// Exploration probability schedule: start.
    pub epsilon_max: f64,
    /// Exploration probability schedule: floor.
    pub epsilon_min: f64,
    /// Curriculum-reset probability schedule: start.
    pub rho_max: f64,
    /// Curriculum-reset probability schedule: floor.
    pub rho_min: f64,
    /// Episodes over which ε and ρ decay to 1% of their range.
    pub decay_episodes: f64,
    /// UCB bias coefficient c.
    pub ucb_c: f64,
    /// UAB bump factor μ.
    pub uab_mu: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            hidden: 24,
            alpha: 1e-3,
            gamma: 0.98,
            epsilon_max: 0.3,
            epsilon_min: 0.05,
            rho_max: 0.3,
            rho_min: 0.05,
            decay_episodes: 2000.0,
            ucb_c: 0.0005,
            uab_mu: 2.0,
        }
    }
}

/// Exponential decay from `max` to `min`: after n episodes the excess over
/// the floor has shrunk by exp(n·ln(0.01)/decay_episodes).
pub fn decayed(max: f64, min: f64, episode: u64, decay_episodes: f64) -> f64 {
    let ln_hundredth = fmath::ln(0.01);
    let factor = fmath::exp(episode as f64 * ln_hundredth / decay_episodes);
    min + (max - min) * factor
}

/// Dimension mismatch between an observation and the network input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionMismatch {
    /// What the network expects.
    pub expected: usize,
    /// What was supplied.
    pub got: usize,
}

impl core::fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "observation length {} does not match network input {}", self.got, self.expected)
    }
}

/// Softmax policy: obs → hidden (tanh) → action logits → softmax.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyNet {
    /// Input dimension.
    pub n_in: usize,
    /// Hidden width.
    pub n_hidden: usize,
    /// Output (action) dimension.
    pub n_out: usize,
    /// Hidden weights, row-major `n_hidden × n_in`.
    pub w1: Vec<f64>,
    /// Hidden biases, length `n_hidden`.
    pub b1: Vec<f64>,
    /// Output weights, row-major `n_out × n_hidden`.
    pub w2: Vec<f64>,
    /// Output biases, length `n_out`.
    pub b2: Vec<f64>,
}

impl PolicyNet {
    /// Fresh network with weights drawn uniformly from (−0.1, 0.1).
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize, rng: &mut impl Rng) -> PolicyNet {
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect()
        };
        PolicyNet {
            n_in,
            n_hidden,
            n_out,
            w1: draw(n_hidden * n_in),
            b1: draw(n_hidden),
            w2: draw(n_out * n_hidden),
            b2: draw(n_out),
        }
    }

    /// Zero-initialized network (uniform policy regardless of input).
    pub fn zeros(n_in: usize, n_hidden: usize, n_out: usize) -> PolicyNet {
        PolicyNet {
            n_in,
            n_hidden,
            n_out,
            w1: alloc::vec![0.0; n_hidden * n_in],
            b1: alloc::vec![0.0; n_hidden],
            w2: alloc::vec![0.0; n_out * n_hidden],
            b2: alloc::vec![0.0; n_out],
        }
    }

    /// Hidden activations (tanh) for an observation.
    fn hidden(&self, obs: &[f64]) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.n_hidden);
        for i in 0..self.n_hidden {
            let mut z = self.b1[i];
            let row = &self.w1[i * self.n_in..(i + 1) * self.n_in];
            for (w, x) in row.iter().zip(obs) {
                z += w * x;
            }
            h.push(fmath::tanh(z));
        }
        h
    }

    /// Action probabilities π(·|obs): softmax over the output logits.
    pub fn probs(&self, obs: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        if obs.len() != self.n_in {
            return Err(DimensionMismatch { expected: self.n_in, got: obs.len() });
        }
        let h = self.hidden(obs);
        let mut logits = Vec::with_capacity(self.n_out);
        for i in 0..self.n_out {
            let mut z = self.b2[i];
            let row = &self.w2[i * self.n_hidden..(i + 1) * self.n_hidden];
            for (w, x) in row.iter().zip(&h) {
                z += w * x;
            }
            logits.push(z);
        }
        Ok(softmax(&logits))
    }

    /// All parameters flattened (w1, b1, w2, b2) — used by serialization and
    /// the finite-difference gradient check.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::new();
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.extend_from_slice(&self.b2);
        v
    }

    /// Rebuilds a network from the flat layout produced by [`PolicyNet::flat`].
    pub fn from_flat(
        n_in: usize,
        n_hidden: usize,
        n_out: usize,
        flat: &[f64],
    ) -> Option<PolicyNet> {
        let (s1, s2, s3, s4) = (n_hidden * n_in, n_hidden, n_out * n_hidden, n_out);
        if flat.len() != s1 + s2 + s3 + s4 {
            return None;
        }
        let mut at = 0;
        let mut take = |n: usize| -> Vec<f64> {
            let v = flat[at..at + n].to_vec();
            at += n;
            v
        };
        Some(PolicyNet {
            n_in,
            n_hidden,
            n_out,
            w1: take(s1),
            b1: take(s2),
            w2: take(s3),
            b2: take(s4),
        })
    }

    /// Accumulates scale·∇log π(action|obs), evaluated at `self`, into
    /// `grads` (a parameter-shaped accumulator).
    ///
    /// Backprop through softmax + tanh by hand: with p = π(·|obs) and one-hot
    /// y for the action, dlogits = y − p; hidden grads follow the chain rule.
    fn add_scaled_logprob_grad(&self, obs: &[f64], action: usize, scale: f64, grads: &mut PolicyNet) {
        let h = self.hidden(obs);
        let p = self.probs(obs).expect("caller checked dimensions");
        // dlogits[i] = (1 if i==action else 0) − p[i]
        let mut dh = alloc::vec![0.0; self.n_hidden];
        for i in 0..self.n_out {
            let d = (if i == action { 1.0 } else { 0.0 }) - p[i];
            grads.b2[i] += scale * d;
            let row = i * self.n_hidden;
            for j in 0..self.n_hidden {
                dh[j] += d * self.w2[row + j];
                grads.w2[row + j] += scale * d * h[j];
            }
        }
        for j in 0..self.n_hidden {
            let dz = dh[j] * (1.0 - h[j] * h[j]); // tanh'
            grads.b1[j] += scale * dz;
            let row = j * self.n_in;
            for (k, x) in obs.iter().enumerate() {
                grads.w1[row + k] += scale * dz * x;
            }
        }
    }

    /// Adds `scale` times another parameter-shaped vector to the parameters.
    fn add_scaled(&mut self, other: &PolicyNet, scale: f64) {
        for (a, b) in self.w1.iter_mut().zip(&other.w1) {
            *a += scale * b;
        }
        for (a, b) in self.b1.iter_mut().zip(&other.b1) {
            *a += scale * b;
        }
        for (a, b) in self.w2.iter_mut().zip(&other.w2) {
            *a += scale * b;
        }
        for (a, b) in self.b2.iter_mut().zip(&other.b2) {
            *a += scale * b;
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| fmath::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the maximum value; ties break to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Count-based exploration bookkeeping shared across one discovery run.
#[derive(Debug, Clone)]
pub struct ExplorationState {
    /// Which overlay to apply.
    pub strategy: Strategy,
    /// Indices of the actions to bias (novel actions + the failed operator).
    pub biased: Vec<usize>,
    /// Per-action selection counts, initialized at 1. Reset each episode by
    /// [`ExplorationState::begin_episode`]: every episode is its own bandit
    /// run, so the confidence bonuses regain full strength at its start.
    pub counts: Vec<u64>,
    /// Step counter feeding the √(ln t) numerator, initialized at 1 and
    /// reset per episode together with the counts.
    pub t: u64,
    /// Current exploration probability.
    pub epsilon: f64,
    /// Additive preference overlay accumulated over the exploring steps of
    /// the current episode (confidence-bound bonuses). Reset by
    /// [`ExplorationState::begin_episode`].
    pub shift: Vec<f64>,
    /// Multiplicative preference overlay accumulated over the exploring
    /// steps of the current episode (uniform-biasing factors). Reset by
    /// [`ExplorationState::begin_episode`].
    pub scale: Vec<f64>,
}

impl ExplorationState {
    /// Fresh exploration state for `n_actions` actions.
    pub fn new(strategy: Strategy, biased: Vec<usize>, n_actions: usize, epsilon: f64) -> Self {
        ExplorationState {
            strategy,
            biased,
            counts: alloc::vec![1; n_actions],
            t: 1,
            epsilon,
            shift: alloc::vec![0.0; n_actions],
            scale: alloc::vec![1.0; n_actions],
        }
    }

    /// Resets the per-episode bandit state: the preference overlays, the
    /// selection counts and the step counter.
    pub fn begin_episode(&mut self) {
        self.shift.iter_mut().for_each(|v| *v = 0.0);
        self.scale.iter_mut().for_each(|v| *v = 1.0);
        self.counts.iter_mut().for_each(|v| *v = 1);
        self.t = 1;
    }
}

/// UCB overlay: each biased action gains c·√(ln t / N(a)), every other
/// action loses the same term. The result is only ever argmaxed, so it is
/// deliberately not renormalized.
pub fn bias_ucb(probs: &[f64], biased: &[usize], counts: &[u64], t: u64, c: f64) -> Vec<f64> {
    let ln_t = fmath::ln(t as f64);
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let bonus = c * fmath::sqrt(ln_t / counts[i] as f64);
            if biased.contains(&i) {
                p + bonus
            } else {
                p - bonus
            }
        })
        .collect()
}

/// Error for a UAB bias set carrying zero probability mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyBiasSet;

impl core::fmt::Display for EmptyBiasSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "uniform action biasing needs a bias set with positive probability mass")
    }
}

/// UAB overlay: biased actions are scaled by (μ−1+S)/(μ·S) where S is their
/// total probability mass; everything else is divided by μ. The output is
/// again a distribution (the Δ-mass becomes (μ−1+S)/μ and the complement
/// (1−S)/μ, summing to 1).
pub fn bias_uab(probs: &[f64], biased: &[usize], mu: f64) -> Result<Vec<f64>, EmptyBiasSet> {
    let s: f64 = biased.iter().map(|i| probs[*i]).sum();
    if s <= 0.0 {
        return Err(EmptyBiasSet);
    }
    Ok(probs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if biased.contains(&i) {
                (mu - 1.0 + s) * p / (mu * s)
            } else {
                p / mu
            }
        })
        .collect())
}

/// Samples an index from an (unnormalized, non-negative) weight vector;
/// falls back to the argmax when the mass is degenerate.
pub fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().filter(|w| w.is_finite() && **w > 0.0).sum();
    if total <= 0.0 || !total.is_finite() {
        return argmax(weights);
    }
    let mut u = rng.gen_range(0.0..1.0) * total;
    for (i, w) in weights.iter().enumerate() {
        if w.is_finite() && *w > 0.0 {
            u -= w;
            if u <= 0.0 {
                return i;
            }
        }
    }
    weights.len() - 1
}

/// Picks the next action.
///
/// Non-exploring steps sample from the policy's probabilities — the learner
/// is a policy-gradient method, so its own stochasticity is the baseline
/// exploration. With probability ε an exploring step fires instead: EG
/// returns a uniformly random action; the knowledge-guided strategies fold
/// one more bias application into a per-episode preference overlay — UCB
/// adds ±c·√(ln t / N(a)) to an additive shift, UAB multiplies a scale by
/// (μ−1+S)/(μ·S) on the biased set and by 1/μ elsewhere (S is the biased
/// set's share of the current preference mass; an empty share leaves the
/// overlay untouched) — and then draw from the adjusted preferences
/// `probs[i]·scale[i] + shift[i]` (negative entries carry no mass). The
/// overlay persists across the episode's exploring steps, so repeated nudges
/// tilt the draw further toward the biased set as the episode goes on;
/// [`ExplorationState::begin_episode`] resets it. Count and step bookkeeping
/// updates on every call.
pub fn select_action(
    probs: &[f64],
    expl: &mut ExplorationState,
    cfg: &LearnerConfig,
    rng: &mut impl Rng,
) -> usize {
    let exploring = rng.gen_range(0.0..1.0) < expl.epsilon;
    let choice = if exploring {
        match expl.strategy {
            Strategy::Eg => rng.gen_range(0..probs.len()),
            Strategy::KgeUcb => {
                let ln_t = fmath::ln(expl.t as f64);
                for i in 0..probs.len() {
                    let bonus = cfg.ucb_c * fmath::sqrt(ln_t / expl.counts[i] as f64);
                    if expl.biased.contains(&i) {
                        expl.shift[i] += bonus;
                    } else {
                        expl.shift[i] -= bonus;
                    }
                }
                sample_index(&preference(probs, expl), rng)
            }
            Strategy::KgeUab => {
                let total: f64 = probs.iter().zip(&expl.scale).map(|(p, s)| p * s).sum();
                let mass: f64 =
                    expl.biased.iter().map(|i| probs[*i] * expl.scale[*i]).sum();
                if mass > 0.0 && total > 0.0 {
                    let share = mass / total;
                    let up = (cfg.uab_mu - 1.0 + share) / (cfg.uab_mu * share);
                    for i in 0..probs.len() {
                        if expl.biased.contains(&i) {
                            expl.scale[i] *= up;
                        } else {
                            expl.scale[i] /= cfg.uab_mu;
                        }
                    }
                }
                sample_index(&preference(probs, expl), rng)
            }
        }
    } else {
        sample_index(probs, rng)
    };
    expl.counts[choice] += 1;
    expl.t += 1;
    choice
}

/// The episode's current action preferences: policy probabilities combined
/// with the accumulated exploration overlays.
fn preference(probs: &[f64], expl: &ExplorationState) -> Vec<f64> {
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * expl.scale[i] + expl.shift[i])
        .collect()
}

/// One recorded decision.
#[derive(Debug, Clone)]
pub struct Transition {
    /// Observation at decision time.
    pub obs: Vec<f64>,
    /// Chosen action index.
    pub action: usize,
    /// Reward received for the decision.
    pub reward: f64,
    /// Whether the episode terminated on this decision.
    pub done: bool,
}

/// Accumulated decisions across episodes between network updates.
#[derive(Debug, Clone, Default)]
pub struct EpisodeBuffer {
    /// Stored transitions in decision order; `done` marks episode ends.
    pub steps: Vec<Transition>,
}

impl EpisodeBuffer {
    /// Appends one decision.
    pub fn push(&mut self, obs: Vec<f64>, action: usize, reward: f64, done: bool) {
        self.steps.push(Transition { obs, action, reward, done });
    }

    /// Number of stored decisions.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// True when nothing is stored.
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Error for an update on an empty buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyBuffer;

impl core::fmt::Display for EmptyBuffer {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "cannot update the network from an empty buffer")
    }
}

/// Discounted returns-to-go, restarting at episode boundaries (`done`).
pub fn returns_to_go(steps: &[Transition], gamma: f64) -> Vec<f64> {
    let mut g = alloc::vec![0.0; steps.len()];
    let mut acc = 0.0;
    for i in (0..steps.len()).rev() {
        if steps[i].done {
            acc = 0.0;
        }
        acc = steps[i].reward + gamma * acc;
        g[i] = acc;
    }
    g
}

/// Batch-normalizes returns in place (subtract mean, divide by std + 1e-8).
pub fn normalize(returns: &mut [f64]) {
    let n = returns.len() as f64;
    let mean: f64 = returns.iter().sum::<f64>() / n;
    let var: f64 = returns.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n;
    let std = fmath::sqrt(var) + 1e-8;
    for g in returns.iter_mut() {
        *g = (*g - mean) / std;
    }
}

/// REINFORCE update: θ ← θ + α·Σ_t G_t·∇log π(a_t|s_t) with batch-normalized
/// discounted returns-to-go. Clears the buffer.
pub fn update_network(
    net: &mut PolicyNet,
    buffer: &mut EpisodeBuffer,
    cfg: &LearnerConfig,
) -> Result<(), EmptyBuffer> {
    if buffer.is_empty() {
        return Err(EmptyBuffer);
    }
    let mut g = returns_to_go(&buffer.steps, cfg.gamma);
    // A single-transition batch keeps its raw return: mean-centering would
    // erase the only learning signal.
    if g.len() >= 2 {
        normalize(&mut g);
    }
    // The whole batch gradient is evaluated at the current parameters, then
    // applied in one step.
    let mut grads = PolicyNet::zeros(net.n_in, net.n_hidden, net.n_out);
    for (step, gt) in buffer.steps.iter().zip(&g) {
        net.add_scaled_logprob_grad(&step.obs, step.action, *gt, &mut grads);
    }
    net.add_scaled(&grads, cfg.alpha);
    buffer.steps.clear();
    Ok(())
}

/// Σ G_t·log π(a_t|s_t) for a fixed batch — the objective whose gradient the
/// manual backprop computes. Exposed for the finite-difference test oracle.
pub fn batch_objective(net: &PolicyNet, steps: &[Transition], returns: &[f64]) -> f64 {
    let mut total = 0.0;
    for (step, gt) in steps.iter().zip(returns) {
        let p = net.probs(&step.obs).expect("dimensions fixed by caller");
        total += gt * fmath::ln(p[step.action]);
    }
    total
}

/// Human-readable description of a strategy list (for CLI help/errors).
pub fn strategy_names() -> String {
    String::from("EG, KGE-UCB, KGE-UAB")
}
