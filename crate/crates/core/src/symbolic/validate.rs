//! Domain validation: repair numeric preconditions that under-guard their
//! own consumption.
//!
//! An operator that decreases a fluent by `k` but only requires `≥ b` with
//! `b < k` could drive the fluent negative. The validator raises each such
//! bound to `k` (adding the bound if absent) and reports what it changed, so
//! the non-negativity invariant holds without hand-editing domain files.

use alloc::string::String;
use alloc::vec::Vec;

use super::{Atom, Condition, Domain, Effect, Term};

/// One repaired precondition bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationWarning {
    /// Operator whose precondition was tightened.
    pub operator: String,
    /// The fluent term, rendered as `head arg…`.
    pub fluent: String,
    /// Bound before repair; `None` if the precondition was missing entirely.
    pub old_bound: Option<i64>,
    /// Bound after repair (the consumption amount).
    pub new_bound: i64,
}

impl core::fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.old_bound {
            Some(b) => write!(
                f,
                "operator `{}`: precondition `{} >= {}` raised to >= {} to cover consumption",
                self.operator, self.fluent, b, self.new_bound
            ),
            None => write!(
                f,
                "operator `{}`: added precondition `{} >= {}` to cover consumption",
                self.operator, self.fluent, self.new_bound
            ),
        }
    }
}

fn render(atom: &Atom) -> String {
    let mut s = atom.head.clone();
    for t in &atom.args {
        match t {
            Term::Const(c) => {
                s.push(' ');
                s.push_str(c);
            }
            Term::Var(v) => {
                let _ = core::fmt::Write::write_fmt(&mut s, format_args!(" ?{v}"));
            }
        }
    }
    s
}

/// Tightens every numeric precondition that is weaker than the operator's own
/// consumption of the same fluent. Returns one warning per repair; an empty
/// vector means the domain was already consistent.
pub fn validate_domain(domain: &mut Domain) -> Vec<ValidationWarning> {
    let mut warnings = Vec::new();
    for op in &mut domain.operators {
        // Total consumption per fluent term (an operator could decrease the
        // same term twice; sum them).
        let mut consumption: Vec<(Atom, i64)> = Vec::new();
        for eff in &op.effects {
            if let Effect::Decrease { fluent, amount } = eff {
                if let Some(entry) = consumption.iter_mut().find(|(a, _)| a == fluent) {
                    entry.1 += amount;
                } else {
                    consumption.push((fluent.clone(), *amount));
                }
            }
        }
        for (fluent, needed) in consumption {
            let existing = op.preconditions.iter_mut().find_map(|c| match c {
                Condition::GreaterEq { fluent: f, bound } if *f == fluent => Some(bound),
                _ => None,
            });
            match existing {
                Some(bound) if *bound >= needed => {}
                Some(bound) => {
                    warnings.push(ValidationWarning {
                        operator: op.name.clone(),
                        fluent: render(&fluent),
                        old_bound: Some(*bound),
                        new_bound: needed,
                    });
                    *bound = needed;
                }
                None => {
                    warnings.push(ValidationWarning {
                        operator: op.name.clone(),
                        fluent: render(&fluent),
                        old_bound: None,
                        new_bound: needed,
                    });
                    op.preconditions.push(Condition::GreaterEq { fluent, bound: needed });
                }
            }
        }
    }
    warnings
}
