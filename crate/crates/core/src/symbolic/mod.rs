//! Typed numeric-STRIPS model: a deliberately small PDDL subset.
//!
//! Supported surface: `:typing`, `:strips`, `:fluents`; conjunctive
//! preconditions and goals built from positive/negative predicate literals
//! and `(>= (fluent …) k)` bounds; effects built from add/delete literals
//! and `(increase|decrease (fluent …) k)`; typed parameters; `(= (fluent) k)`
//! fluent initialization in problems. Fluents are non-negative integers.
//! Anything outside the subset is a hard parse error naming the construct —
//! silent acceptance of unsupported syntax would corrupt plans downstream.
//!
//! The module owns parsing ([`parse_domain`], [`parse_problem`]), canonical
//! printing ([`print_domain`], [`print_problem`]), grounding ([`ground`]),
//! state transition ([`GroundTask::applicable`], [`GroundTask::apply`]), and
//! domain validation ([`validate_domain`]) which tightens numeric
//! preconditions that could otherwise drive a fluent negative.

mod ground;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ground::{ground, GroundError, GroundOperator, GroundTask, SymbolicState};
pub use parser::{parse_domain, parse_problem};
pub use printer::{print_domain, print_problem};
pub use validate::{validate_domain, ValidationWarning};

use alloc::string::String;
use alloc::vec::Vec;

/// The canonical crafting domain shipped with the crate (parsed by tests and
/// used by the recovery loop as the agent's initial knowledge).
pub const DOMAIN_PDDL: &str = include_str!("../../assets/domain.pddl");

/// A term in an atom: either a schema variable (`?x`) or an object constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    /// Schema parameter, stored without the leading `?`.
    Var(String),
    /// Object constant.
    Const(String),
}

impl Term {
    /// The constant name, if this term is ground.
    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }
}

/// A predicate or fluent application: `head(args…)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    /// Predicate or function name.
    pub head: String,
    /// Argument terms.
    pub args: Vec<Term>,
}

impl Atom {
    /// Ground atom from constant names.
    pub fn ground(head: &str, args: &[&str]) -> Self {
        Atom {
            head: String::from(head),
            args: args.iter().map(|a| Term::Const(String::from(*a))).collect(),
        }
    }

    /// True if no argument is a variable.
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }
}

/// A name with a declared type (`?v - physobj`, `tree_log - tree_log`, …).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TypedName {
    /// Parameter/object/type name.
    pub name: String,
    /// Declared type (`object` when omitted in the source).
    pub ty: String,
}

/// One conjunct of a precondition or goal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// Predicate literal; `positive: false` means `(not …)`.
    Fact {
        /// Literal polarity.
        positive: bool,
        /// The predicate application.
        atom: Atom,
    },
    /// Numeric bound `(>= (fluent …) bound)`.
    GreaterEq {
        /// The fluent application.
        fluent: Atom,
        /// Inclusive lower bound.
        bound: i64,
    },
}

/// One effect of an operator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Effect {
    /// Add a predicate literal.
    Add(Atom),
    /// Delete a predicate literal.
    Delete(Atom),
    /// `(increase (fluent …) amount)`.
    Increase {
        /// The fluent application.
        fluent: Atom,
        /// Non-negative step.
        amount: i64,
    },
    /// `(decrease (fluent …) amount)`.
    Decrease {
        /// The fluent application.
        fluent: Atom,
        /// Non-negative step.
        amount: i64,
    },
}

/// A lifted operator (PDDL `:action`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSchema {
    /// Schema name.
    pub name: String,
    /// Typed parameters.
    pub params: Vec<TypedName>,
    /// Conjunctive precondition.
    pub preconditions: Vec<Condition>,
    /// Conjunctive effect.
    pub effects: Vec<Effect>,
}

/// Predicate or function declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    /// Declared name.
    pub name: String,
    /// Typed parameters.
    pub params: Vec<TypedName>,
}

/// A parsed domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    /// Domain name.
    pub name: String,
    /// Requirement keywords as written (`:typing`, …).
    pub requirements: Vec<String>,
    /// Type declarations (`name - parent`).
    pub types: Vec<TypedName>,
    /// Predicate declarations.
    pub predicates: Vec<Signature>,
    /// Function (fluent) declarations.
    pub functions: Vec<Signature>,
    /// Operator schemas in declaration order.
    pub operators: Vec<OperatorSchema>,
}

impl Domain {
    /// Looks up an operator schema by name.
    pub fn operator(&self, name: &str) -> Option<&OperatorSchema> {
        self.operators.iter().find(|o| o.name == name)
    }

    /// True if `sub` equals `sup` or descends from it through the type tree.
    /// Every type is a subtype of `object`.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup || sup == "object" {
            return true;
        }
        let mut cur = sub;
        // Walk parents; type lists are tiny, so a linear scan per hop is fine.
        loop {
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => {
                    if t.ty == sup {
                        return true;
                    }
                    if t.ty == cur {
                        return false; // self-parent guard
                    }
                    cur = &t.ty;
                }
                None => return false,
            }
        }
    }
}

/// A parsed problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    /// Problem name.
    pub name: String,
    /// Referenced domain name.
    pub domain: String,
    /// Typed objects.
    pub objects: Vec<TypedName>,
    /// Ground initial facts.
    pub init_facts: Vec<Atom>,
    /// Ground initial fluent values from `(= (fluent …) k)`.
    pub init_fluents: Vec<(Atom, i64)>,
    /// Conjunctive ground goal.
    pub goal: Vec<Condition>,
}

/// Parse/semantic error for the PDDL subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PddlError {
    /// Malformed syntax.
    Syntax {
        /// 1-based source line.
        line: u32,
        /// 1-based source column.
        col: u32,
        /// What went wrong.
        message: String,
    },
    /// Syntactically valid PDDL outside the supported subset.
    Unsupported {
        /// 1-based source line.
        line: u32,
        /// 1-based source column.
        col: u32,
        /// The offending keyword or form.
        construct: String,
    },
    /// Structurally valid but semantically inconsistent input
    /// (unknown type, arity mismatch, non-ground problem atom, …).
    Semantic {
        /// What went wrong.
        message: String,
    },
}

impl core::fmt::Display for PddlError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PddlError::Syntax { line, col, message } => {
                write!(f, "syntax error at {line}:{col}: {message}")
            }
            PddlError::Unsupported { line, col, construct } => {
                write!(f, "unsupported construct at {line}:{col}: {construct}")
            }
            PddlError::Semantic { message } => write!(f, "semantic error: {message}"),
        }
    }
}
