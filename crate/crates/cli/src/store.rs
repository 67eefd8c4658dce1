//! Executor persistence: a versioned record carrying the operator, an
//! action-space snapshot, the flat policy parameters with their layer
//! shapes, and the termination clauses by name. Restoring checks the
//! snapshot against the target scenario and refuses on any mismatch, so a
//! stored policy can never index into the wrong action list.

use rapidlearn_core::bridge::{AgentAction, ClauseNames, EffectClause, Executor, StretchIPT};
use rapidlearn_core::learner::{PolicyNet, Strategy};
use rapidlearn_core::util::fnv1a64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Current executor file format version.
pub const EXECUTOR_FORMAT: u32 = 1;

/// Serialized form of a learned executor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredExecutor {
    /// File format version (see [`EXECUTOR_FORMAT`]).
    pub format_version: u32,
    /// Scenario the executor was trained in.
    pub scenario: String,
    /// Ground operator display name this executor recovers.
    pub operator: String,
    /// Action repertoire snapshot the policy indexes into.
    pub actions: Vec<AgentAction>,
    /// Observation lexicon (entity names) at training time.
    pub entity_lexicon: Vec<String>,
    /// Hash over `actions` and `entity_lexicon` for quick mismatch checks.
    pub action_space_hash: u64,
    /// Network dimensions: input, hidden, output.
    pub layer_shapes: [usize; 3],
    /// Flat parameter vector (hidden weights, hidden biases, output weights,
    /// output biases).
    pub params: Vec<f64>,
    /// Termination clauses by fact/fluent name.
    pub clauses: Vec<ClauseNames>,
    /// Whether training met the convergence test.
    pub converged: bool,
    /// Training episodes consumed.
    pub episodes: u64,
    /// Training world-steps consumed.
    pub training_steps: u64,
    /// Exploration strategy used during training.
    pub strategy: Strategy,
}

/// Hash of an action repertoire + entity lexicon pair.
fn space_hash(actions: &[AgentAction], lexicon: &[String]) -> u64 {
    let mut bytes = Vec::new();
    for a in actions {
        bytes.extend_from_slice(a.name().as_bytes());
        bytes.push(0);
    }
    bytes.push(1);
    for e in lexicon {
        bytes.extend_from_slice(e.as_bytes());
        bytes.push(0);
    }
    fnv1a64(&bytes)
}

fn lexicon_names(ipt: &StretchIPT) -> Vec<String> {
    ipt.world.lexicon().iter().map(|k| k.name().to_string()).collect()
}

impl StoredExecutor {
    /// Snapshot of a live executor against its scenario.
    pub fn from_executor(e: &Executor, ipt: &StretchIPT, scenario: &str) -> StoredExecutor {
        let entity_lexicon = lexicon_names(ipt);
        StoredExecutor {
            format_version: EXECUTOR_FORMAT,
            scenario: scenario.to_string(),
            operator: e.operator.clone(),
            actions: e.actions.clone(),
            entity_lexicon: entity_lexicon.clone(),
            action_space_hash: space_hash(&e.actions, &entity_lexicon),
            layer_shapes: [e.policy.n_in, e.policy.n_hidden, e.policy.n_out],
            params: e.policy.flat(),
            clauses: e.clauses.iter().map(|c| c.to_names(&ipt.task)).collect(),
            converged: e.converged,
            episodes: e.episodes,
            training_steps: e.training_steps,
            strategy: e.strategy,
        }
    }
}

/// Why a stored executor cannot run against a scenario.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RestoreError {
    /// Unknown format version.
    #[error("unsupported executor format version {0}")]
    Version(u32),
    /// The stored hash disagrees with the stored snapshot (corrupt file).
    #[error("action-space hash does not match the stored snapshot")]
    CorruptHash,
    /// The parameter vector length disagrees with the layer shapes.
    #[error("parameter vector does not fit the declared layer shapes")]
    BadShapes,
    /// Output width must equal the action count; input width the
    /// observation length.
    #[error("network dimensions do not fit the scenario (expected in={expected_in}, out={expected_out})")]
    DimensionMismatch {
        /// Observation length of the target scenario.
        expected_in: usize,
        /// Action count of the stored snapshot.
        expected_out: usize,
    },
    /// The target scenario's action space differs from the snapshot.
    #[error("stored action space does not match the scenario (expected hash {expected:#018x})")]
    SpaceMismatch {
        /// Hash of the target scenario's action space.
        expected: u64,
    },
    /// A stored sub-executor reference is not registered in the target.
    #[error("stored repertoire references unregistered executor `{0}`")]
    MissingSubExecutor(String),
    /// A termination clause names a fact or fluent the task lacks.
    #[error("termination clause references facts unknown to the scenario")]
    UnknownClauseName,
}

/// Rebuilds a live executor against `ipt`, refusing on any mismatch between
/// the stored action-space snapshot and the scenario's actual repertoire
/// (primitives first, then already-registered executors in name order —
/// the same shape discovery builds).
pub fn restore_into(stored: &StoredExecutor, ipt: &StretchIPT) -> Result<Executor, RestoreError> {
    if stored.format_version != EXECUTOR_FORMAT {
        return Err(RestoreError::Version(stored.format_version));
    }
    if space_hash(&stored.actions, &stored.entity_lexicon) != stored.action_space_hash {
        return Err(RestoreError::CorruptHash);
    }
    let [n_in, n_hidden, n_out] = stored.layer_shapes;
    let policy = PolicyNet::from_flat(n_in, n_hidden, n_out, &stored.params)
        .ok_or(RestoreError::BadShapes)?;

    let obs_len = ipt.world.config().observation_len();
    if n_in != obs_len || n_out != stored.actions.len() {
        return Err(RestoreError::DimensionMismatch {
            expected_in: obs_len,
            expected_out: stored.actions.len(),
        });
    }

    let mut expected: Vec<AgentAction> =
        ipt.actions.iter().map(|a| AgentAction::Primitive(*a)).collect();
    for name in ipt.registry.operators() {
        expected.push(AgentAction::Learned(name));
    }
    let expected_hash = space_hash(&expected, &lexicon_names(ipt));
    if expected_hash != stored.action_space_hash {
        return Err(RestoreError::SpaceMismatch { expected: expected_hash });
    }
    for a in &stored.actions {
        if let AgentAction::Learned(name) = a {
            if ipt.registry.get(name).is_none() {
                return Err(RestoreError::MissingSubExecutor(name.clone()));
            }
        }
    }

    let clauses: Vec<EffectClause> = stored
        .clauses
        .iter()
        .map(|c| EffectClause::from_names(c, &ipt.task))
        .collect::<Option<_>>()
        .ok_or(RestoreError::UnknownClauseName)?;

    Ok(Executor {
        operator: stored.operator.clone(),
        actions: stored.actions.clone(),
        policy,
        clauses,
        converged: stored.converged,
        episodes: stored.episodes,
        training_steps: stored.training_steps,
        strategy: stored.strategy,
    })
}
