use std::collections::HashSet;

use super::ast::*;
use super::sexpr::{read, syntax, SExpr};
use super::PddlError;

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

fn atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}, found a list")))
}

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], PddlError> {
    e.as_list().ok_or_else(|| {
        syntax(
            e.pos(),
            format!("expected {what}, found `{}`", e.as_atom().unwrap_or("")),
        )
    })
}

/// Splits `(define (<kind> <name>) sections...)` into the name and sections.
fn define<'a>(e: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr]), PddlError> {
    let items = list(e, "(define ...)")?;
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return Err(syntax(e.pos(), "expected `(define ...)`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(e.pos(), format!("missing ({kind} <name>)")))?;
    let h = list(header, "header")?;
    if h.len() != 2 || h[0].as_atom() != Some(kind) {
        return Err(syntax(header.pos(), format!("expected ({kind} <name>)")));
    }
    Ok((atom(&h[1], "name")?.to_string(), &items[2..]))
}

/// Parses `a b - t c - u d` style lists. Variables keep their `?` stripped.
fn typed_list(items: &[SExpr], vars: bool) -> Result<Vec<TypedName>, PddlError> {
    let mut out: Vec<TypedName> = Vec::new();
    let mut pending = 0usize;
    let mut i = 0;
    while i < items.len() {
        let s = atom(&items[i], "name")?;
        if s == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| syntax(items[i].pos(), "missing type after `-`"))?;
            if ty.head() == Some("either") {
                return Err(PddlError::Unsupported("either types".into()));
            }
            let ty = atom(ty, "type name")?.to_string();
            let n = out.len();
            for t in &mut out[n - pending..] {
                t.ty = Some(ty.clone());
            }
            pending = 0;
            i += 2;
            continue;
        }
        let name = if vars {
            s.strip_prefix('?')
                .ok_or_else(|| syntax(items[i].pos(), format!("expected a variable, found `{s}`")))?
        } else {
            s
        };
        out.push(TypedName {
            name: name.to_string(),
            ty: None,
        });
        pending += 1;
        i += 1;
    }
    Ok(out)
}

fn check_requirements(items: &[SExpr], into: &mut Vec<String>) -> Result<(), PddlError> {
    for r in items {
        let r = atom(r, "requirement")?;
        if !SUPPORTED_REQUIREMENTS.contains(&r) {
            return Err(PddlError::UnsupportedRequirement(r.to_string()));
        }
        if !into.iter().any(|x| x == r) {
            into.push(r.to_string());
        }
    }
    Ok(())
}

/// Collects positive literals of a conjunction, rejecting everything beyond STRIPS.
fn conjunction(e: &SExpr, out: &mut Vec<(SExpr, bool)>, allow_neg: bool) -> Result<(), PddlError> {
    let items = list(e, "a formula")?;
    match items.first().and_then(SExpr::as_atom) {
        None if items.is_empty() => Ok(()),
        None => Err(syntax(e.pos(), "expected a predicate name")),
        Some("and") => {
            for sub in &items[1..] {
                conjunction(sub, out, allow_neg)?;
            }
            Ok(())
        }
        Some("not") => {
            if items.len() != 2 || items[1].as_list().is_none() {
                return Err(syntax(e.pos(), "malformed (not ...)"));
            }
            if !allow_neg {
                return Err(PddlError::UnsupportedRequirement(":negative-preconditions".into()));
            }
            if matches!(items[1].head(), Some("and" | "not" | "forall" | "when")) {
                return Err(syntax(items[1].pos(), "negation must wrap a single atom"));
            }
            out.push((items[1].clone(), false));
            Ok(())
        }
        Some("=") => Err(PddlError::UnsupportedRequirement(":equality".into())),
        Some("or" | "imply") => Err(PddlError::UnsupportedRequirement(":disjunctive-preconditions".into())),
        Some("exists") => Err(PddlError::UnsupportedRequirement(":existential-preconditions".into())),
        Some("forall") => Err(PddlError::UnsupportedRequirement(":universal-preconditions".into())),
        Some("when") => Err(PddlError::UnsupportedRequirement(":conditional-effects".into())),
        Some("increase" | "decrease" | "assign" | "scale-up" | "scale-down") => {
            Err(PddlError::UnsupportedRequirement(":numeric-fluents".into()))
        }
        Some("at" | "over") if items.len() == 3 && items[2].as_list().is_some() => {
            Err(PddlError::UnsupportedRequirement(":durative-actions".into()))
        }
        Some(_) => {
            out.push((e.clone(), true));
            Ok(())
        }
    }
}

struct DomainBuilder {
    domain: Domain,
}

impl DomainBuilder {
    fn check_type(&self, ty: &Option<String>) -> Result<(), PddlError> {
        match ty.as_deref() {
            None | Some("object") => Ok(()),
            Some(t) if self.domain.types.iter().any(|d| d.name == t) => Ok(()),
            Some(t) => Err(PddlError::UndeclaredType(t.to_string())),
        }
    }

    fn literal(&self, e: &SExpr, params: &[TypedName]) -> Result<LiteralTemplate, PddlError> {
        let items = list(e, "a literal")?;
        let predicate = atom(&items[0], "predicate name")?.to_string();
        let decl = self
            .domain
            .predicate(&predicate)
            .ok_or_else(|| PddlError::UndeclaredPredicate(predicate.clone()))?;
        if decl.params.len() != items.len() - 1 {
            return Err(PddlError::ArityMismatch {
                predicate,
                expected: decl.params.len(),
                found: items.len() - 1,
            });
        }
        let mut args = Vec::with_capacity(items.len() - 1);
        for a in &items[1..] {
            let s = atom(a, "term")?;
            if let Some(v) = s.strip_prefix('?') {
                if !params.iter().any(|p| p.name == v) {
                    return Err(PddlError::UndeclaredVariable(s.to_string()));
                }
                args.push(Term::Var(v.to_string()));
            } else {
                if !self.domain.constants.iter().any(|c| c.name == s) {
                    return Err(PddlError::UndeclaredObject(s.to_string()));
                }
                args.push(Term::Const(s.to_string()));
            }
        }
        Ok(LiteralTemplate { predicate, args })
    }

    fn action(&self, items: &[SExpr], pos: super::sexpr::Pos) -> Result<ActionSchema, PddlError> {
        let name = atom(
            items.get(1).ok_or_else(|| syntax(pos, "missing action name"))?,
            "action name",
        )?
        .to_string();
        let mut parameters = Vec::new();
        let mut pre_raw = Vec::new();
        let mut eff_raw = Vec::new();
        let mut i = 2;
        while i < items.len() {
            let key = atom(&items[i], "action keyword")?;
            let val = items
                .get(i + 1)
                .ok_or_else(|| syntax(items[i].pos(), format!("missing value for {key}")))?;
            match key {
                ":parameters" => parameters = typed_list(list(val, "parameter list")?, true)?,
                ":precondition" => conjunction(val, &mut pre_raw, false)?,
                ":effect" => conjunction(val, &mut eff_raw, true)?,
                other => return Err(syntax(items[i].pos(), format!("unknown action keyword `{other}`"))),
            }
            i += 2;
        }
        for p in &parameters {
            self.check_type(&p.ty)?;
        }
        let mut preconditions = Vec::new();
        for (e, _) in &pre_raw {
            let l = self.literal(e, &parameters)?;
            if !preconditions.contains(&l) {
                preconditions.push(l);
            }
        }
        let mut add_effects = Vec::new();
        let mut del_effects = Vec::new();
        for (e, positive) in &eff_raw {
            let l = self.literal(e, &parameters)?;
            let target = if *positive { &mut add_effects } else { &mut del_effects };
            if !target.contains(&l) {
                target.push(l);
            }
        }
        Ok(ActionSchema {
            name,
            parameters,
            preconditions,
            add_effects,
            del_effects,
        })
    }
}

/// Parses a STRIPS (optionally typed) PDDL domain.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let top = read(text)?;
    let (name, sections) = define(&top, "domain")?;
    let mut b = DomainBuilder {
        domain: Domain {
            name,
            requirements: Vec::new(),
            types: Vec::new(),
            constants: Vec::new(),
            predicates: Vec::new(),
            actions: Vec::new(),
        },
    };
    let mut action_blocks = Vec::new();
    for s in sections {
        let items = list(s, "a domain section")?;
        let key = items
            .first()
            .and_then(SExpr::as_atom)
            .ok_or_else(|| syntax(s.pos(), "expected a section keyword"))?;
        match key {
            ":requirements" => check_requirements(&items[1..], &mut b.domain.requirements)?,
            ":types" => {
                let mut types = typed_list(&items[1..], false)?;
                // Parent types named only after `-` are declared implicitly.
                let parents: Vec<String> = types.iter().filter_map(|t| t.ty.clone()).collect();
                for parent in parents {
                    if parent != "object" && !types.iter().any(|t| t.name == parent) {
                        types.push(TypedName { name: parent, ty: None });
                    }
                }
                b.domain.types = types;
            }
            ":constants" => b.domain.constants = typed_list(&items[1..], false)?,
            ":predicates" => {
                for p in &items[1..] {
                    let pl = list(p, "predicate declaration")?;
                    let name = atom(
                        pl.first()
                            .ok_or_else(|| syntax(p.pos(), "empty predicate declaration"))?,
                        "predicate name",
                    )?;
                    b.domain.predicates.push(PredicateDecl {
                        name: name.to_string(),
                        params: typed_list(&pl[1..], true)?,
                    });
                }
            }
            ":action" => action_blocks.push((items, s.pos())),
            ":durative-action" => return Err(PddlError::UnsupportedRequirement(":durative-actions".into())),
            ":functions" => return Err(PddlError::UnsupportedRequirement(":numeric-fluents".into())),
            ":derived" => return Err(PddlError::UnsupportedRequirement(":derived-predicates".into())),
            ":constraints" => return Err(PddlError::UnsupportedRequirement(":constraints".into())),
            other => return Err(syntax(s.pos(), format!("unknown domain section `{other}`"))),
        }
    }
    let typed = b.domain.typed();
    let any_types = !b.domain.types.is_empty()
        || b.domain.constants.iter().any(|c| c.ty.is_some())
        || b.domain
            .predicates
            .iter()
            .flat_map(|p| &p.params)
            .any(|p| p.ty.is_some());
    if any_types && !typed {
        return Err(PddlError::Unsupported("typed declarations without :typing".into()));
    }
    for t in &b.domain.types {
        b.check_type(&t.ty)?;
    }
    for c in &b.domain.constants {
        b.check_type(&c.ty)?;
    }
    for p in &b.domain.predicates {
        for param in &p.params {
            b.check_type(&param.ty)?;
        }
    }
    for (items, pos) in action_blocks {
        let a = b.action(items, pos)?;
        if a.parameters.iter().any(|p| p.ty.is_some()) && !typed {
            return Err(PddlError::Unsupported("typed parameters without :typing".into()));
        }
        b.domain.actions.push(a);
    }
    Ok(b.domain)
}

fn ground_atom(e: &SExpr, domain: &Domain, objects: &HashSet<&str>) -> Result<Proposition, PddlError> {
    let items = list(e, "an atom")?;
    let predicate = atom(
        items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?,
        "predicate name",
    )?
    .to_string();
    let decl = domain
        .predicate(&predicate)
        .ok_or_else(|| PddlError::UndeclaredPredicate(predicate.clone()))?;
    if decl.params.len() != items.len() - 1 {
        return Err(PddlError::ArityMismatch {
            predicate,
            expected: decl.params.len(),
            found: items.len() - 1,
        });
    }
    let mut args = Vec::new();
    for a in &items[1..] {
        let s = atom(a, "object name")?;
        if !objects.contains(s) {
            return Err(PddlError::UndeclaredObject(s.to_string()));
        }
        args.push(s.to_string());
    }
    Ok(Proposition { predicate, args })
}

/// Parses a problem against an already parsed domain. The result is not yet grounded.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let top = read(text)?;
    let (name, sections) = define(&top, "problem")?;
    let mut problem = Problem {
        name,
        domain: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
    };
    let mut init_raw: &[SExpr] = &[];
    let mut goal_raw = None;
    for s in sections {
        let items = list(s, "a problem section")?;
        let key = items
            .first()
            .and_then(SExpr::as_atom)
            .ok_or_else(|| syntax(s.pos(), "expected a section keyword"))?;
        match key {
            ":domain" => {
                let d = atom(
                    items.get(1).ok_or_else(|| syntax(s.pos(), "missing domain name"))?,
                    "domain name",
                )?;
                if d != domain.name {
                    return Err(PddlError::DomainMismatch {
                        expected: domain.name.clone(),
                        found: d.to_string(),
                    });
                }
                problem.domain = d.to_string();
            }
            ":requirements" => check_requirements(&items[1..], &mut Vec::new())?,
            ":objects" => problem.objects = typed_list(&items[1..], false)?,
            ":init" => init_raw = &items[1..],
            ":goal" => {
                goal_raw = Some(items.get(1).ok_or_else(|| syntax(s.pos(), "missing goal formula"))?);
            }
            ":metric" => return Err(PddlError::UnsupportedRequirement(":numeric-fluents".into())),
            other => return Err(syntax(s.pos(), format!("unknown problem section `{other}`"))),
        }
    }
    if problem.domain.is_empty() {
        return Err(syntax(top.pos(), "missing (:domain ...)"));
    }
    for o in &problem.objects {
        if let Some(t) = &o.ty {
            if t != "object" && !domain.types.iter().any(|d| &d.name == t) {
                return Err(PddlError::UndeclaredType(t.clone()));
            }
        }
    }
    let objects: HashSet<&str> = problem
        .objects
        .iter()
        .chain(&domain.constants)
        .map(|o| o.name.as_str())
        .collect();
    for e in init_raw {
        let p = ground_atom(e, domain, &objects)?;
        if !problem.init.contains(&p) {
            problem.init.push(p);
        }
    }
    if let Some(g) = goal_raw {
        let mut lits = Vec::new();
        conjunction(g, &mut lits, true)?;
        for (e, positive) in lits {
            if !positive {
                return Err(PddlError::NegatedGoal(format!("(not {})", render(&e))));
            }
            let p = ground_atom(&e, domain, &objects)?;
            if !problem.goal.contains(&p) {
                problem.goal.push(p);
            }
        }
    }
    Ok(problem)
}

fn render(e: &SExpr) -> String {
    match e {
        SExpr::Atom(s, _) => s.clone(),
        SExpr::List(items, _) => {
            let inner: Vec<String> = items.iter().map(render).collect();
            format!("({})", inner.join(" "))
        }
    }
}
