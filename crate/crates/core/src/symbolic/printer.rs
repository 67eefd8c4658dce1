//! Canonical PDDL serializer; output re-parses to an identical AST.

use alloc::string::String;
use core::fmt::Write;

use super::{Atom, Condition, Domain, Effect, Problem, Term, TypedName};

fn push_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) => {
            out.push('?');
            out.push_str(v);
        }
        Term::Const(c) => out.push_str(c),
    }
}

fn push_atom(out: &mut String, a: &Atom) {
    out.push('(');
    out.push_str(&a.head);
    for t in &a.args {
        out.push(' ');
        push_term(out, t);
    }
    out.push(')');
}

fn push_typed_list(out: &mut String, items: &[TypedName], var_prefix: bool) {
    // Group consecutive same-type names to keep the output compact.
    let mut i = 0;
    let mut first = true;
    while i < items.len() {
        let mut j = i;
        while j < items.len() && items[j].ty == items[i].ty {
            j += 1;
        }
        for item in &items[i..j] {
            if !first {
                out.push(' ');
            }
            first = false;
            if var_prefix {
                out.push('?');
            }
            out.push_str(&item.name);
        }
        let _ = write!(out, " - {}", items[i].ty);
        i = j;
    }
}

fn push_condition(out: &mut String, c: &Condition) {
    match c {
        Condition::Fact { positive: true, atom } => push_atom(out, atom),
        Condition::Fact { positive: false, atom } => {
            out.push_str("(not ");
            push_atom(out, atom);
            out.push(')');
        }
        Condition::GreaterEq { fluent, bound } => {
            out.push_str("(>= ");
            push_atom(out, fluent);
            let _ = write!(out, " {bound})");
        }
    }
}

fn push_condition_set(out: &mut String, cs: &[Condition], indent: &str) {
    out.push_str("(and");
    for c in cs {
        out.push('\n');
        out.push_str(indent);
        push_condition(out, c);
    }
    out.push(')');
}

fn push_effect(out: &mut String, e: &Effect) {
    match e {
        Effect::Add(atom) => push_atom(out, atom),
        Effect::Delete(atom) => {
            out.push_str("(not ");
            push_atom(out, atom);
            out.push(')');
        }
        Effect::Increase { fluent, amount } => {
            out.push_str("(increase ");
            push_atom(out, fluent);
            let _ = write!(out, " {amount})");
        }
        Effect::Decrease { fluent, amount } => {
            out.push_str("(decrease ");
            push_atom(out, fluent);
            let _ = write!(out, " {amount})");
        }
    }
}

/// Serializes a domain to canonical PDDL text.
pub fn print_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        out.push_str("  (:requirements");
        for r in &d.requirements {
            out.push(' ');
            out.push_str(r);
        }
        out.push_str(")\n");
    }
    if !d.types.is_empty() {
        out.push_str("  (:types ");
        push_typed_list(&mut out, &d.types, false);
        out.push_str(")\n");
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for p in &d.predicates {
            let _ = write!(out, "    ({}", p.name);
            if !p.params.is_empty() {
                out.push(' ');
                push_typed_list(&mut out, &p.params, true);
            }
            out.push_str(")\n");
        }
        out.push_str("  )\n");
    }
    if !d.functions.is_empty() {
        out.push_str("  (:functions\n");
        for f in &d.functions {
            let _ = write!(out, "    ({}", f.name);
            if !f.params.is_empty() {
                out.push(' ');
                push_typed_list(&mut out, &f.params, true);
            }
            out.push_str(")\n");
        }
        out.push_str("  )\n");
    }
    for op in &d.operators {
        let _ = writeln!(out, "  (:action {}", op.name);
        out.push_str("    :parameters (");
        push_typed_list(&mut out, &op.params, true);
        out.push_str(")\n");
        out.push_str("    :precondition ");
        push_condition_set(&mut out, &op.preconditions, "      ");
        out.push('\n');
        out.push_str("    :effect ");
        let mut eff = String::new();
        eff.push_str("(and");
        for e in &op.effects {
            eff.push_str("\n      ");
            push_effect(&mut eff, e);
        }
        eff.push(')');
        out.push_str(&eff);
        out.push_str("\n  )\n");
    }
    out.push_str(")\n");
    out
}

/// Serializes a problem to canonical PDDL text.
pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    if !p.objects.is_empty() {
        out.push_str("  (:objects ");
        push_typed_list(&mut out, &p.objects, false);
        out.push_str(")\n");
    }
    out.push_str("  (:init\n");
    for a in &p.init_facts {
        out.push_str("    ");
        push_atom(&mut out, a);
        out.push('\n');
    }
    for (f, v) in &p.init_fluents {
        out.push_str("    (= ");
        push_atom(&mut out, f);
        let _ = writeln!(out, " {v})");
    }
    out.push_str("  )\n");
    out.push_str("  (:goal ");
    push_condition_set(&mut out, &p.goal, "    ");
    out.push_str(")\n)\n");
    out
}
