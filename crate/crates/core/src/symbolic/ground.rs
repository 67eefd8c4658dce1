//! Grounding: instantiate operator schemas over a typed object universe and
//! compile states, preconditions, and effects to bitset/array form.
//!
//! A [`GroundTask`] owns the interned fact and fluent tables; everything else
//! (operators, states, goals) refers to those tables by index. States compare
//! and hash cheaply, which the planner and the plan cache rely on.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::util::Bits;

use super::{Atom, Condition, Domain, Effect, Problem, Term, TypedName};

/// Errors raised while grounding or applying ground operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundError {
    /// A ground atom does not exist in the task's fact/fluent tables.
    UnknownAtom {
        /// Canonical `head arg…` rendering of the offending atom.
        atom: String,
    },
    /// An operator was applied in a state where its precondition fails.
    InapplicableOperator {
        /// Display name of the operator.
        operator: String,
    },
    /// A decrease effect would drive a fluent below zero.
    NegativeFluent {
        /// Canonical rendering of the fluent.
        fluent: String,
        /// Display name of the operator whose effect violated non-negativity.
        operator: String,
    },
}

impl core::fmt::Display for GroundError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GroundError::UnknownAtom { atom } => write!(f, "unknown ground atom `{atom}`"),
            GroundError::InapplicableOperator { operator } => {
                write!(f, "operator `{operator}` is not applicable")
            }
            GroundError::NegativeFluent { fluent, operator } => {
                write!(f, "operator `{operator}` would drive `{fluent}` below zero")
            }
        }
    }
}

/// A fully instantiated operator in compiled form. Indices refer to the
/// owning [`GroundTask`]'s fact and fluent tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundOperator {
    /// Schema name, e.g. `approach`.
    pub schema: String,
    /// Bound arguments in parameter order.
    pub args: Vec<String>,
    /// Facts that must hold.
    pub pre_pos: Bits,
    /// Facts that must not hold.
    pub pre_neg: Bits,
    /// `(fluent, bound)` pairs: fluent value must be ≥ bound.
    pub pre_num: Vec<(usize, i64)>,
    /// Facts asserted by the effect.
    pub add: Bits,
    /// Facts retracted by the effect.
    pub del: Bits,
    /// `(fluent, amount)` increments.
    pub increases: Vec<(usize, i64)>,
    /// `(fluent, amount)` decrements.
    pub decreases: Vec<(usize, i64)>,
}

impl GroundOperator {
    /// Display name: schema followed by its arguments, space-separated.
    pub fn display_name(&self) -> String {
        let mut s = self.schema.clone();
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s
    }
}

/// Truth assignment over the task's fact table plus fluent valuations.
///
/// Values are comparable and hashable, so they can key caches directly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymbolicState {
    /// One bit per entry of [`GroundTask::facts`].
    pub facts: Bits,
    /// One value per entry of [`GroundTask::fluents`]; always ≥ 0.
    pub fluents: Vec<i64>,
}

fn atom_key(head: &str, args: &[Term]) -> String {
    let mut s = head.to_string();
    for a in args {
        s.push(' ');
        match a {
            Term::Const(c) => s.push_str(c),
            Term::Var(v) => {
                s.push('?');
                s.push_str(v);
            }
        }
    }
    s
}

/// A compiled planning task: interned atom tables, ground operators, the
/// initial state, and the goal.
#[derive(Debug, Clone)]
pub struct GroundTask {
    /// Object universe in declaration order.
    pub objects: Vec<TypedName>,
    /// Ground predicate atoms; index = bit position in state fact sets.
    pub facts: Vec<Atom>,
    /// Ground fluent atoms; index into state fluent vectors.
    pub fluents: Vec<Atom>,
    /// All ground operators, in schema declaration order then binding order.
    pub operators: Vec<GroundOperator>,
    /// Initial state (zeroed when the task was built without a problem).
    pub s0: SymbolicState,
    /// Goal facts that must hold.
    pub goal_pos: Bits,
    /// Goal facts that must not hold.
    pub goal_neg: Bits,
    /// Goal numeric lower bounds `(fluent, bound)`.
    pub goal_num: Vec<(usize, i64)>,
    fact_ids: BTreeMap<String, usize>,
    fluent_ids: BTreeMap<String, usize>,
}

/// Collects constants used directly in operator bodies that are not declared
/// objects. These behave like PDDL domain constants: they populate the atom
/// tables (typed by the signature position they appear in, most specific type
/// winning across usages) but never bind operator parameters.
fn body_constants(domain: &Domain, objects: &[TypedName]) -> Vec<TypedName> {
    let mut extra: Vec<TypedName> = Vec::new();
    let mut note = |name: &String, ty: &str, domain: &Domain| {
        if objects.iter().any(|o| &o.name == name) {
            return;
        }
        if let Some(entry) = extra.iter_mut().find(|e| &e.name == name) {
            if domain.is_subtype(ty, &entry.ty) {
                entry.ty = ty.to_string();
            }
        } else {
            extra.push(TypedName { name: name.clone(), ty: ty.to_string() });
        }
    };
    let mut note_atom = |atom: &Atom, domain: &Domain, is_fluent: bool| {
        let sigs = if is_fluent { &domain.functions } else { &domain.predicates };
        let Some(sig) = sigs.iter().find(|s| s.name == atom.head) else {
            return;
        };
        for (term, param) in atom.args.iter().zip(sig.params.iter()) {
            if let Term::Const(c) = term {
                note(c, &param.ty, domain);
            }
        }
    };
    for op in &domain.operators {
        for cond in &op.preconditions {
            match cond {
                Condition::Fact { atom, .. } => note_atom(atom, domain, false),
                Condition::GreaterEq { fluent, .. } => note_atom(fluent, domain, true),
            }
        }
        for eff in &op.effects {
            match eff {
                Effect::Add(atom) | Effect::Delete(atom) => note_atom(atom, domain, false),
                Effect::Increase { fluent, .. } | Effect::Decrease { fluent, .. } => {
                    note_atom(fluent, domain, true)
                }
            }
        }
    }
    extra
}

/// Builds the ground operator set (and atom tables) for a domain over a typed
/// object universe. The returned task has an all-false/all-zero initial state
/// and an empty goal; use [`GroundTask::from_problem`] for a full task.
pub fn ground(domain: &Domain, objects: &[TypedName]) -> Result<GroundTask, GroundError> {
    let mut task = GroundTask {
        objects: objects.to_vec(),
        facts: Vec::new(),
        fluents: Vec::new(),
        operators: Vec::new(),
        s0: SymbolicState::default(),
        goal_pos: Bits::new(),
        goal_neg: Bits::new(),
        goal_num: Vec::new(),
        fact_ids: BTreeMap::new(),
        fluent_ids: BTreeMap::new(),
    };

    // Atom tables cover declared objects plus operator-body constants;
    // parameter bindings below use declared objects only.
    let mut table_universe = objects.to_vec();
    table_universe.extend(body_constants(domain, objects));

    // Atom tables: every type-consistent instantiation of every declared
    // predicate and function, in declaration order then object order.
    for pred in &domain.predicates {
        for binding in bindings(domain, &table_universe, &pred.params, false) {
            let atom = Atom {
                head: pred.name.clone(),
                args: binding.iter().map(|o| Term::Const((*o).clone())).collect(),
            };
            let key = atom_key(&atom.head, &atom.args);
            let id = task.facts.len();
            task.facts.push(atom);
            task.fact_ids.insert(key, id);
        }
    }
    for func in &domain.functions {
        for binding in bindings(domain, &table_universe, &func.params, false) {
            let atom = Atom {
                head: func.name.clone(),
                args: binding.iter().map(|o| Term::Const((*o).clone())).collect(),
            };
            let key = atom_key(&atom.head, &atom.args);
            let id = task.fluents.len();
            task.fluents.push(atom);
            task.fluent_ids.insert(key, id);
        }
    }
    task.s0.fluents = alloc::vec![0; task.fluents.len()];

    // Operators: one per all-distinct, type-consistent binding. Distinctness
    // prunes no-ops like approaching the entity already faced.
    for schema in &domain.operators {
        for binding in bindings(domain, objects, &schema.params, true) {
            let mut subst = BTreeMap::new();
            for (p, obj) in schema.params.iter().zip(binding.iter()) {
                subst.insert(p.name.as_str(), (*obj).clone());
            }
            let mut op = GroundOperator {
                schema: schema.name.clone(),
                args: binding.iter().map(|o| (*o).clone()).collect(),
                pre_pos: Bits::new(),
                pre_neg: Bits::new(),
                pre_num: Vec::new(),
                add: Bits::new(),
                del: Bits::new(),
                increases: Vec::new(),
                decreases: Vec::new(),
            };
            for cond in &schema.preconditions {
                match cond {
                    Condition::Fact { positive, atom } => {
                        let id = task.fact_id_of(&substitute(atom, &subst))?;
                        if *positive {
                            op.pre_pos.set(id);
                        } else {
                            op.pre_neg.set(id);
                        }
                    }
                    Condition::GreaterEq { fluent, bound } => {
                        let id = task.fluent_id_of(&substitute(fluent, &subst))?;
                        op.pre_num.push((id, *bound));
                    }
                }
            }
            for eff in &schema.effects {
                match eff {
                    Effect::Add(atom) => {
                        let id = task.fact_id_of(&substitute(atom, &subst))?;
                        op.add.set(id);
                    }
                    Effect::Delete(atom) => {
                        let id = task.fact_id_of(&substitute(atom, &subst))?;
                        op.del.set(id);
                    }
                    Effect::Increase { fluent, amount } => {
                        let id = task.fluent_id_of(&substitute(fluent, &subst))?;
                        op.increases.push((id, *amount));
                    }
                    Effect::Decrease { fluent, amount } => {
                        let id = task.fluent_id_of(&substitute(fluent, &subst))?;
                        op.decreases.push((id, *amount));
                    }
                }
            }
            task.operators.push(op);
        }
    }
    Ok(task)
}

fn substitute(atom: &Atom, subst: &BTreeMap<&str, String>) -> Atom {
    Atom {
        head: atom.head.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Term::Const(c.clone()),
                Term::Var(v) => Term::Const(
                    subst.get(v.as_str()).cloned().unwrap_or_else(|| format!("?{v}")),
                ),
            })
            .collect(),
    }
}

/// Enumerates parameter bindings in object-list order. With `distinct`,
/// bindings that reuse an object are skipped.
fn bindings<'a>(
    domain: &Domain,
    objects: &'a [TypedName],
    params: &[TypedName],
    distinct: bool,
) -> Vec<Vec<&'a String>> {
    let candidates: Vec<Vec<&String>> = params
        .iter()
        .map(|p| {
            objects
                .iter()
                .filter(|o| domain.is_subtype(&o.ty, &p.ty))
                .map(|o| &o.name)
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut current: Vec<&String> = Vec::with_capacity(params.len());
    fn rec<'a>(
        candidates: &[Vec<&'a String>],
        depth: usize,
        distinct: bool,
        current: &mut Vec<&'a String>,
        out: &mut Vec<Vec<&'a String>>,
    ) {
        if depth == candidates.len() {
            out.push(current.clone());
            return;
        }
        for c in &candidates[depth] {
            if distinct && current.iter().any(|x| x == c) {
                continue;
            }
            current.push(c);
            rec(candidates, depth + 1, distinct, current, out);
            current.pop();
        }
    }
    rec(&candidates, 0, distinct, &mut current, &mut out);
    out
}

impl GroundTask {
    /// Builds a complete task: atom tables, operators, initial state, goal.
    pub fn from_problem(domain: &Domain, problem: &Problem) -> Result<Self, GroundError> {
        let mut task = ground(domain, &problem.objects)?;
        for fact in &problem.init_facts {
            let id = task.fact_id_of(fact)?;
            task.s0.facts.set(id);
        }
        for (fluent, value) in &problem.init_fluents {
            let id = task.fluent_id_of(fluent)?;
            task.s0.fluents[id] = *value;
        }
        for cond in &problem.goal {
            match cond {
                Condition::Fact { positive, atom } => {
                    let id = task.fact_id_of(atom)?;
                    if *positive {
                        task.goal_pos.set(id);
                    } else {
                        task.goal_neg.set(id);
                    }
                }
                Condition::GreaterEq { fluent, bound } => {
                    let id = task.fluent_id_of(fluent)?;
                    task.goal_num.push((id, *bound));
                }
            }
        }
        Ok(task)
    }

    fn fact_id_of(&self, atom: &Atom) -> Result<usize, GroundError> {
        let key = atom_key(&atom.head, &atom.args);
        self.fact_ids.get(&key).copied().ok_or(GroundError::UnknownAtom { atom: key })
    }

    fn fluent_id_of(&self, atom: &Atom) -> Result<usize, GroundError> {
        let key = atom_key(&atom.head, &atom.args);
        self.fluent_ids.get(&key).copied().ok_or(GroundError::UnknownAtom { atom: key })
    }

    /// Looks up a fact id from head and constant arguments.
    pub fn fact_id(&self, head: &str, args: &[&str]) -> Option<usize> {
        self.fact_ids.get(&key_of(head, args)).copied()
    }

    /// Looks up a fluent id from head and constant arguments.
    pub fn fluent_id(&self, head: &str, args: &[&str]) -> Option<usize> {
        self.fluent_ids.get(&key_of(head, args)).copied()
    }

    /// Finds an operator index by display name, e.g. `"approach air tree_log"`.
    pub fn operator_id(&self, display: &str) -> Option<usize> {
        self.operators.iter().position(|o| o.display_name() == display)
    }

    /// True iff `o`'s precondition holds in `s`: positive facts present,
    /// negative facts absent, numeric bounds met.
    pub fn applicable(&self, s: &SymbolicState, op: &GroundOperator) -> bool {
        s.facts.contains_all(&op.pre_pos)
            && !s.facts.intersects(&op.pre_neg)
            && op.pre_num.iter().all(|(f, b)| s.fluents[*f] >= *b)
    }

    /// Applies `op` to `s`: deletes, then adds, then numeric updates.
    pub fn apply(&self, s: &SymbolicState, op: &GroundOperator) -> Result<SymbolicState, GroundError> {
        if !self.applicable(s, op) {
            return Err(GroundError::InapplicableOperator { operator: op.display_name() });
        }
        let mut next = s.clone();
        next.facts.subtract(&op.del);
        next.facts.union_with(&op.add);
        for (f, k) in &op.increases {
            next.fluents[*f] += k;
        }
        for (f, k) in &op.decreases {
            next.fluents[*f] -= k;
            if next.fluents[*f] < 0 {
                return Err(GroundError::NegativeFluent {
                    fluent: atom_key(&self.fluents[*f].head, &self.fluents[*f].args),
                    operator: op.display_name(),
                });
            }
        }
        next.facts.normalize();
        Ok(next)
    }

    /// True iff the task goal holds in `s`.
    pub fn satisfies_goal(&self, s: &SymbolicState) -> bool {
        s.facts.contains_all(&self.goal_pos)
            && !s.facts.intersects(&self.goal_neg)
            && self.goal_num.iter().all(|(f, b)| s.fluents[*f] >= *b)
    }

    /// True iff `op`'s declared effects are visible across a transition:
    /// added facts present in `post`, deleted facts absent in `post`, and each
    /// increased fluent grew by at least the declared amount relative to
    /// `pre`. Decreases are consumption, not production, and are not checked.
    pub fn effects_met(
        &self,
        pre: &SymbolicState,
        post: &SymbolicState,
        op: &GroundOperator,
    ) -> bool {
        post.facts.contains_all(&op.add)
            && !post.facts.intersects(&op.del)
            && op.increases.iter().all(|(f, k)| post.fluents[*f] >= pre.fluents[*f] + k)
    }

    /// Renders a fact id back to `head arg…` form (debugging, traces).
    pub fn fact_name(&self, id: usize) -> String {
        atom_key(&self.facts[id].head, &self.facts[id].args)
    }

    /// Renders a fluent id back to `head arg…` form.
    pub fn fluent_name(&self, id: usize) -> String {
        atom_key(&self.fluents[id].head, &self.fluents[id].args)
    }
}

fn key_of(head: &str, args: &[&str]) -> String {
    let mut s = head.to_string();
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s
}
