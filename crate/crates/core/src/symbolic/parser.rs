//! Recursive-descent parser for the supported PDDL subset.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::lexer::{lex, Tok, Token};
use super::{
    Atom, Condition, Domain, Effect, OperatorSchema, PddlError, Problem, Signature, Term,
    TypedName,
};

const SUPPORTED_REQUIREMENTS: [&str; 3] = [":typing", ":strips", ":fluents"];

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    fn new(src: &str) -> Result<Self, PddlError> {
        Ok(Cursor { toks: lex(src)?, pos: 0 })
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, PddlError> {
        let (line, col) = self.here();
        Err(PddlError::Syntax { line, col, message: message.into() })
    }

    fn unsupported<T>(&self, construct: impl Into<String>) -> Result<T, PddlError> {
        let (line, col) = self.here();
        Err(PddlError::Unsupported { line, col, construct: construct.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_lparen(&mut self) -> Result<(), PddlError> {
        match self.next() {
            Some(Tok::LParen) => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.syntax("expected `(`")
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), PddlError> {
        match self.next() {
            Some(Tok::RParen) => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.syntax("expected `)`")
            }
        }
    }

    fn expect_symbol(&mut self) -> Result<String, PddlError> {
        match self.next() {
            Some(Tok::Symbol(s)) => Ok(s),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.syntax("expected symbol")
            }
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), PddlError> {
        let s = self.expect_symbol()?;
        if s == kw {
            Ok(())
        } else {
            self.pos -= 1;
            self.syntax(format!("expected `{kw}`, got `{s}`"))
        }
    }

    fn expect_number(&mut self) -> Result<i64, PddlError> {
        match self.next() {
            Some(Tok::Number(n)) => Ok(n),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.syntax("expected integer")
            }
        }
    }

    fn at_rparen(&self) -> bool {
        matches!(self.peek(), Some(Tok::RParen))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Parses `name… - type` groups until `)`. Names without a type get `object`.
fn parse_typed_list(c: &mut Cursor) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    loop {
        match c.peek() {
            Some(Tok::RParen) | None => break,
            Some(Tok::Symbol(s)) if s == "-" => {
                c.next();
                let ty = c.expect_symbol()?;
                if pending.is_empty() {
                    return c.syntax("dangling `-` in typed list");
                }
                for name in pending.drain(..) {
                    out.push(TypedName { name, ty: ty.clone() });
                }
            }
            Some(Tok::Symbol(_)) => {
                pending.push(c.expect_symbol()?);
            }
            _ => return c.syntax("expected name or `-` in typed list"),
        }
    }
    for name in pending {
        out.push(TypedName { name, ty: "object".to_string() });
    }
    Ok(out)
}

fn term_of(symbol: String) -> Term {
    if let Some(rest) = symbol.strip_prefix('?') {
        Term::Var(rest.to_string())
    } else {
        Term::Const(symbol)
    }
}

/// Parses an atom body after the head symbol has been consumed, up to `)`.
fn parse_atom_args(c: &mut Cursor, head: String) -> Result<Atom, PddlError> {
    let mut args = Vec::new();
    while !c.at_rparen() {
        args.push(term_of(c.expect_symbol()?));
    }
    c.expect_rparen()?;
    Ok(Atom { head, args })
}

/// Parses one condition form: literal, negated literal, or `(>= (f …) k)`.
fn parse_condition(c: &mut Cursor) -> Result<Condition, PddlError> {
    c.expect_lparen()?;
    let head = c.expect_symbol()?;
    match head.as_str() {
        "not" => {
            c.expect_lparen()?;
            let inner_head = c.expect_symbol()?;
            if is_reserved_form(&inner_head) {
                return c.unsupported(format!("(not ({inner_head} …)) in condition"));
            }
            let atom = parse_atom_args(c, inner_head)?;
            c.expect_rparen()?;
            Ok(Condition::Fact { positive: false, atom })
        }
        ">=" => {
            c.expect_lparen()?;
            let fluent_head = c.expect_symbol()?;
            let fluent = parse_atom_args(c, fluent_head)?;
            let bound = c.expect_number()?;
            c.expect_rparen()?;
            Ok(Condition::GreaterEq { fluent, bound })
        }
        "<" | "<=" | ">" | "=" | "or" | "imply" | "exists" | "forall" | "when" => {
            c.unsupported(format!("`{head}` in condition"))
        }
        _ => {
            let atom = parse_atom_args(c, head)?;
            Ok(Condition::Fact { positive: true, atom })
        }
    }
}

/// Conjunction or single condition.
fn parse_condition_set(c: &mut Cursor) -> Result<Vec<Condition>, PddlError> {
    // Peek inside the opening paren for `and`.
    c.expect_lparen()?;
    if let Some(Tok::Symbol(s)) = c.peek() {
        if s == "and" {
            c.next();
            let mut out = Vec::new();
            while !c.at_rparen() {
                out.push(parse_condition(c)?);
            }
            c.expect_rparen()?;
            return Ok(out);
        }
    }
    // Single condition: rewind the `(` and parse one form.
    c.pos -= 1;
    Ok(alloc::vec![parse_condition(c)?])
}

fn parse_effect(c: &mut Cursor) -> Result<Effect, PddlError> {
    c.expect_lparen()?;
    let head = c.expect_symbol()?;
    match head.as_str() {
        "not" => {
            c.expect_lparen()?;
            let inner_head = c.expect_symbol()?;
            let atom = parse_atom_args(c, inner_head)?;
            c.expect_rparen()?;
            Ok(Effect::Delete(atom))
        }
        "increase" | "decrease" => {
            c.expect_lparen()?;
            let fluent_head = c.expect_symbol()?;
            let fluent = parse_atom_args(c, fluent_head)?;
            let amount = c.expect_number()?;
            if amount < 0 {
                return c.syntax("negative step in numeric effect");
            }
            c.expect_rparen()?;
            if head == "increase" {
                Ok(Effect::Increase { fluent, amount })
            } else {
                Ok(Effect::Decrease { fluent, amount })
            }
        }
        "assign" | "scale-up" | "scale-down" | "when" | "forall" => {
            c.unsupported(format!("`{head}` in effect"))
        }
        _ => {
            let atom = parse_atom_args(c, head)?;
            Ok(Effect::Add(atom))
        }
    }
}

fn parse_effect_set(c: &mut Cursor) -> Result<Vec<Effect>, PddlError> {
    c.expect_lparen()?;
    if let Some(Tok::Symbol(s)) = c.peek() {
        if s == "and" {
            c.next();
            let mut out = Vec::new();
            while !c.at_rparen() {
                out.push(parse_effect(c)?);
            }
            c.expect_rparen()?;
            return Ok(out);
        }
    }
    c.pos -= 1;
    Ok(alloc::vec![parse_effect(c)?])
}

fn is_reserved_form(head: &str) -> bool {
    matches!(
        head,
        "and" | "or" | "not" | "imply" | "exists" | "forall" | "when" | ">=" | "<=" | "<" | ">"
            | "=" | "increase" | "decrease" | "assign"
    )
}

fn parse_action(c: &mut Cursor) -> Result<OperatorSchema, PddlError> {
    let name = c.expect_symbol()?;
    let mut params = Vec::new();
    let mut preconditions = Vec::new();
    let mut effects = Vec::new();
    while !c.at_rparen() {
        let kw = c.expect_symbol()?;
        match kw.as_str() {
            ":parameters" => {
                c.expect_lparen()?;
                params = parse_typed_list(c)?;
                c.expect_rparen()?;
                for p in &params {
                    if !p.name.starts_with('?') {
                        return c.syntax(format!("parameter `{}` must start with `?`", p.name));
                    }
                }
                // Strip the `?` so parameters line up with `Term::Var` names.
                for p in &mut params {
                    p.name.remove(0);
                }
            }
            ":precondition" => preconditions = parse_condition_set(c)?,
            ":effect" => effects = parse_effect_set(c)?,
            other => return c.unsupported(format!("action field `{other}`")),
        }
    }
    c.expect_rparen()?;
    Ok(OperatorSchema { name, params, preconditions, effects })
}

fn parse_signature_block(c: &mut Cursor) -> Result<Vec<Signature>, PddlError> {
    let mut out = Vec::new();
    while !c.at_rparen() {
        c.expect_lparen()?;
        let name = c.expect_symbol()?;
        let mut params = parse_typed_list(c)?;
        c.expect_rparen()?;
        for p in &mut params {
            if !p.name.starts_with('?') {
                return c.syntax(format!("signature parameter `{}` must start with `?`", p.name));
            }
            // Store bare names; the serializer re-adds the `?`.
            p.name.remove(0);
        }
        out.push(Signature { name, params });
    }
    c.expect_rparen()?;
    Ok(out)
}

/// Parses a domain file.
pub fn parse_domain(src: &str) -> Result<Domain, PddlError> {
    let mut c = Cursor::new(src)?;
    c.expect_lparen()?;
    c.expect_keyword("define")?;
    c.expect_lparen()?;
    c.expect_keyword("domain")?;
    let name = c.expect_symbol()?;
    c.expect_rparen()?;

    let mut domain = Domain {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        operators: Vec::new(),
    };

    while !c.at_rparen() {
        c.expect_lparen()?;
        let section = c.expect_symbol()?;
        match section.as_str() {
            ":requirements" => {
                while !c.at_rparen() {
                    let req = c.expect_symbol()?;
                    if !SUPPORTED_REQUIREMENTS.contains(&req.as_str()) {
                        return c.unsupported(format!("requirement `{req}`"));
                    }
                    domain.requirements.push(req);
                }
                c.expect_rparen()?;
            }
            ":types" => {
                domain.types = parse_typed_list(&mut c)?;
                c.expect_rparen()?;
            }
            ":predicates" => domain.predicates = parse_signature_block(&mut c)?,
            ":functions" => domain.functions = parse_signature_block(&mut c)?,
            ":action" => domain.operators.push(parse_action(&mut c)?),
            other => return c.unsupported(format!("domain section `{other}`")),
        }
    }
    c.expect_rparen()?;
    if !c.at_end() {
        return c.syntax("trailing tokens after domain");
    }
    check_domain_semantics(&domain)?;
    Ok(domain)
}

fn semantic<T>(message: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Semantic { message: message.into() })
}

fn check_atom_against(
    atom: &Atom,
    sigs: &[Signature],
    kind: &str,
    params: &[TypedName],
) -> Result<(), PddlError> {
    let Some(sig) = sigs.iter().find(|s| s.name == atom.head) else {
        return semantic(format!("unknown {kind} `{}`", atom.head));
    };
    if sig.params.len() != atom.args.len() {
        return semantic(format!(
            "{kind} `{}` expects {} args, got {}",
            atom.head,
            sig.params.len(),
            atom.args.len()
        ));
    }
    for t in &atom.args {
        if let Term::Var(v) = t {
            if !params.iter().any(|p| &p.name == v) {
                return semantic(format!("unbound variable `?{v}` in `{}`", atom.head));
            }
        }
    }
    Ok(())
}

fn check_domain_semantics(d: &Domain) -> Result<(), PddlError> {
    for op in &d.operators {
        for p in &op.params {
            let declared = p.ty == "object"
                || d.types.iter().any(|t| t.name == p.ty || t.ty == p.ty);
            if !declared {
                return semantic(format!(
                    "operator `{}`: unknown parameter type `{}`",
                    op.name, p.ty
                ));
            }
        }
        for cond in &op.preconditions {
            match cond {
                Condition::Fact { atom, .. } => {
                    check_atom_against(atom, &d.predicates, "predicate", &op.params)?
                }
                Condition::GreaterEq { fluent, .. } => {
                    check_atom_against(fluent, &d.functions, "function", &op.params)?
                }
            }
        }
        for eff in &op.effects {
            match eff {
                Effect::Add(atom) | Effect::Delete(atom) => {
                    check_atom_against(atom, &d.predicates, "predicate", &op.params)?
                }
                Effect::Increase { fluent, .. } | Effect::Decrease { fluent, .. } => {
                    check_atom_against(fluent, &d.functions, "function", &op.params)?
                }
            }
        }
    }
    Ok(())
}

/// Parses a problem file and validates it against an already-parsed domain:
/// object types, init/goal predicate and function references, and arity.
pub fn parse_problem(src: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let mut c = Cursor::new(src)?;
    c.expect_lparen()?;
    c.expect_keyword("define")?;
    c.expect_lparen()?;
    c.expect_keyword("problem")?;
    let name = c.expect_symbol()?;
    c.expect_rparen()?;

    let mut problem = Problem {
        name,
        domain: String::new(),
        objects: Vec::new(),
        init_facts: Vec::new(),
        init_fluents: Vec::new(),
        goal: Vec::new(),
    };

    while !c.at_rparen() {
        c.expect_lparen()?;
        let section = c.expect_symbol()?;
        match section.as_str() {
            ":domain" => {
                problem.domain = c.expect_symbol()?;
                c.expect_rparen()?;
            }
            ":objects" => {
                problem.objects = parse_typed_list(&mut c)?;
                c.expect_rparen()?;
            }
            ":init" => {
                while !c.at_rparen() {
                    c.expect_lparen()?;
                    let head = c.expect_symbol()?;
                    if head == "=" {
                        c.expect_lparen()?;
                        let fluent_head = c.expect_symbol()?;
                        let fluent = parse_atom_args(&mut c, fluent_head)?;
                        let value = c.expect_number()?;
                        if value < 0 {
                            return c.syntax("fluents are non-negative");
                        }
                        c.expect_rparen()?;
                        problem.init_fluents.push((fluent, value));
                    } else if head == "not" {
                        return c.unsupported("negative init literal");
                    } else {
                        let atom = parse_atom_args(&mut c, head)?;
                        problem.init_facts.push(atom);
                    }
                }
                c.expect_rparen()?;
            }
            ":goal" => {
                problem.goal = parse_condition_set(&mut c)?;
                c.expect_rparen()?;
            }
            other => return c.unsupported(format!("problem section `{other}`")),
        }
    }
    c.expect_rparen()?;
    if !c.at_end() {
        return c.syntax("trailing tokens after problem");
    }
    check_problem_semantics(&problem, domain)?;
    Ok(problem)
}

fn check_problem_semantics(p: &Problem, d: &Domain) -> Result<(), PddlError> {
    if p.domain != d.name {
        return semantic(format!(
            "problem targets domain `{}`, but the loaded domain is `{}`",
            p.domain, d.name
        ));
    }
    for obj in &p.objects {
        let known = obj.ty == "object"
            || d.types.iter().any(|t| t.name == obj.ty || t.ty == obj.ty);
        if !known {
            return semantic(format!("object `{}` has unknown type `{}`", obj.name, obj.ty));
        }
    }
    let check_ground_atom = |atom: &Atom, sigs: &[Signature], kind: &str| -> Result<(), PddlError> {
        if !atom.is_ground() {
            return semantic(format!("atom `{}` is not ground", atom.head));
        }
        check_atom_against(atom, sigs, kind, &[])?;
        for t in &atom.args {
            if let Term::Const(c) = t {
                if !p.objects.iter().any(|o| &o.name == c) {
                    return semantic(format!("`{c}` is not a declared object"));
                }
            }
        }
        Ok(())
    };
    for a in &p.init_facts {
        check_ground_atom(a, &d.predicates, "predicate")?;
    }
    for (f, _) in &p.init_fluents {
        check_ground_atom(f, &d.functions, "function")?;
    }
    for g in &p.goal {
        match g {
            Condition::Fact { atom, .. } => check_ground_atom(atom, &d.predicates, "predicate")?,
            Condition::GreaterEq { fluent, .. } => {
                check_ground_atom(fluent, &d.functions, "function")?
            }
        }
    }
    Ok(())
}
