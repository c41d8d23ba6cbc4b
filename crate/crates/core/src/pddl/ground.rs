//! Grounding of action schemas into a [`Task`].
//!
//! Instantiations are enumerated per schema in parameter order, pruned early
//! by static predicates, and finally filtered by a delete-free reachability
//! fixpoint from the initial state.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use crate::task::{GroundAction, PropId, Task};

struct Candidate {
    name: String,
    pre: Vec<usize>,
    add: Vec<usize>,
    del: Vec<usize>,
}

#[derive(Default)]
struct Interner {
    atoms: Vec<Proposition>,
    index: HashMap<Proposition, usize>,
}

impl Interner {
    fn intern(&mut self, p: Proposition) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.atoms.len();
        self.index.insert(p.clone(), i);
        self.atoms.push(p);
        i
    }
}

fn instantiate(l: &LiteralTemplate, params: &[TypedName], binding: &[usize], objects: &[&str]) -> Proposition {
    let args = l
        .args
        .iter()
        .map(|t| match t {
            Term::Const(c) => c.clone(),
            Term::Var(v) => {
                let idx = params.iter().position(|p| &p.name == v).expect("validated variable");
                objects[binding[idx]].to_string()
            }
        })
        .collect();
    Proposition {
        predicate: l.predicate.clone(),
        args,
    }
}

/// Highest parameter index a literal mentions, or `None` when it is ground.
fn last_var(l: &LiteralTemplate, params: &[TypedName]) -> Option<usize> {
    l.args
        .iter()
        .filter_map(|t| match t {
            Term::Var(v) => params.iter().position(|p| &p.name == v),
            Term::Const(_) => None,
        })
        .max()
}

/// Enumerates every type-consistent instantiation of every schema and keeps
/// those reachable under delete relaxation.
pub fn ground(domain: &Domain, problem: &Problem) -> Task {
    let objects: Vec<&TypedName> = domain.constants.iter().chain(&problem.objects).collect();
    let object_names: Vec<&str> = objects.iter().map(|o| o.name.as_str()).collect();
    let typed = domain.typed();

    let fluent: HashSet<&str> = domain
        .actions
        .iter()
        .flat_map(|a| a.add_effects.iter().chain(&a.del_effects))
        .map(|l| l.predicate.as_str())
        .collect();
    let init: HashSet<&Proposition> = problem.init.iter().collect();

    let mut interner = Interner::default();
    for p in &problem.init {
        interner.intern(p.clone());
    }
    let mut candidates = Vec::new();

    for schema in &domain.actions {
        let domains: Vec<Vec<usize>> = schema
            .parameters
            .iter()
            .map(|param| {
                (0..objects.len())
                    .filter(|&i| !typed || domain.is_subtype(objects[i].ty.as_deref(), param.ty.as_deref()))
                    .collect()
            })
            .collect();
        // Static preconditions checked as soon as their last variable is bound.
        let mut checks: Vec<Vec<&LiteralTemplate>> = vec![Vec::new(); schema.parameters.len() + 1];
        for l in &schema.preconditions {
            if !fluent.contains(l.predicate.as_str()) {
                let slot = last_var(l, &schema.parameters).map_or(0, |i| i + 1);
                checks[slot].push(l);
            }
        }
        let holds = |l: &LiteralTemplate, binding: &[usize]| {
            init.contains(&instantiate(l, &schema.parameters, binding, &object_names))
        };
        if !checks[0].iter().all(|l| holds(l, &[])) {
            continue;
        }
        let n = schema.parameters.len();
        let mut binding = vec![0usize; n];
        let mut cursor = vec![0usize; n];
        let mut depth = 0usize;
        if n == 0 {
            candidates.push(make_candidate(schema, &binding, &object_names, &mut interner));
            continue;
        }
        // Iterative backtracking over parameter positions.
        loop {
            if cursor[depth] >= domains[depth].len() {
                if depth == 0 {
                    break;
                }
                cursor[depth] = 0;
                depth -= 1;
                cursor[depth] += 1;
                continue;
            }
            binding[depth] = domains[depth][cursor[depth]];
            if !checks[depth + 1].iter().all(|l| holds(l, &binding[..=depth])) {
                cursor[depth] += 1;
                continue;
            }
            if depth + 1 == n {
                candidates.push(make_candidate(schema, &binding, &object_names, &mut interner));
                cursor[depth] += 1;
            } else {
                depth += 1;
            }
        }
    }

    // Delete-free reachability fixpoint.
    let mut reached = vec![false; interner.atoms.len()];
    let mut order: Vec<usize> = Vec::new();
    for p in &problem.init {
        let i = interner.index[p];
        if !reached[i] {
            reached[i] = true;
            order.push(i);
        }
    }
    let mut enabled = vec![false; candidates.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for (ci, c) in candidates.iter().enumerate() {
            if enabled[ci] || !c.pre.iter().all(|&p| reached[p]) {
                continue;
            }
            enabled[ci] = true;
            changed = true;
            for &p in &c.add {
                if !reached[p] {
                    reached[p] = true;
                    order.push(p);
                }
            }
        }
    }

    // Goal atoms that are never reached still need ids so the graph can report them.
    for g in &problem.goal {
        let i = interner.intern(g.clone());
        if i >= reached.len() {
            reached.push(false);
        }
        if !order.contains(&i) {
            order.push(i);
        }
    }
    let mut final_id: Vec<Option<PropId>> = vec![None; interner.atoms.len()];
    let mut props = Vec::with_capacity(order.len());
    for &i in &order {
        final_id[i] = Some(props.len() as PropId);
        props.push(interner.atoms[i].clone());
    }

    let mut actions = Vec::new();
    for (ci, c) in candidates.into_iter().enumerate() {
        if !enabled[ci] {
            continue;
        }
        let map = |v: &[usize]| -> Vec<PropId> { v.iter().filter_map(|&p| final_id[p]).collect() };
        let pre = map(&c.pre);
        let add = map(&c.add);
        let mut del = map(&c.del);
        let overlap = del.iter().any(|p| add.contains(p));
        del.retain(|p| !add.contains(p));
        // Actions that cannot change any state are dropped.
        if del.is_empty() && add.iter().all(|p| pre.contains(p)) {
            continue;
        }
        if overlap {
            log::warn!("{}: atom both added and deleted; keeping the add", c.name);
        }
        actions.push(GroundAction {
            id: 0,
            name: c.name,
            pre,
            add,
            del,
        });
    }

    let init = problem
        .init
        .iter()
        .map(|p| final_id[interner.index[p]].unwrap())
        .collect();
    let goal = problem
        .goal
        .iter()
        .map(|p| final_id[interner.index[p]].unwrap())
        .collect();
    Task::new(
        problem.name.clone(),
        domain.name.clone(),
        object_names.iter().map(|s| s.to_string()).collect(),
        props,
        init,
        goal,
        actions,
    )
}

fn make_candidate(schema: &ActionSchema, binding: &[usize], objects: &[&str], interner: &mut Interner) -> Candidate {
    let mut lits = |ls: &[LiteralTemplate]| -> Vec<usize> {
        let mut v: Vec<usize> = ls
            .iter()
            .map(|l| interner.intern(instantiate(l, &schema.parameters, binding, objects)))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let pre = lits(&schema.preconditions);
    let add = lits(&schema.add_effects);
    let del = lits(&schema.del_effects);
    let args: Vec<&str> = binding.iter().map(|&b| objects[b]).collect();
    Candidate {
        name: format!("{}({})", schema.name, args.join(",")),
        pre,
        add,
        del,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};
    use crate::suites;

    fn task(domain: &str, problem: &str) -> Task {
        let d = parse_domain(domain).unwrap();
        let p = parse_problem(problem, &d).unwrap();
        ground(&d, &p)
    }

    #[test]
    fn two_switch_has_two_actions() {
        let t = task(suites::TWO_SWITCH_DOMAIN, suites::TWO_SWITCH_PROBLEM);
        let names: Vec<_> = t.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["flipa()", "flipb()"]);
    }

    #[test]
    fn gripper_four_balls_count() {
        let t = task(suites::GRIPPER_DOMAIN, &suites::gripper_problem(4));
        let count = |s: &str| t.actions.iter().filter(|a| a.name.starts_with(s)).count();
        assert_eq!(count("pick("), 16);
        assert_eq!(count("drop("), 16);
        assert_eq!(count("move("), 2);
        assert_eq!(t.num_actions(), 34);
    }

    #[test]
    fn empty_type_yields_no_instances() {
        let d = "(define (domain t) (:requirements :strips :typing) (:types a b)
                   (:predicates (p ?x - a) (q ?y - b))
                   (:action use-b :parameters (?y - b) :precondition (and) :effect (q ?y))
                   (:action use-a :parameters (?x - a) :precondition (and) :effect (p ?x)))";
        let t = task(
            d,
            "(define (problem t1) (:domain t) (:objects x1 x2 - a) (:init) (:goal (and)))",
        );
        assert!(t.actions.iter().all(|a| a.name.starts_with("use-a")));
        assert_eq!(t.num_actions(), 2);
    }

    #[test]
    fn add_delete_overlap_keeps_add() {
        let d = "(define (domain t) (:predicates (at ?x) (loc ?x))
                   (:action go :parameters (?a ?b) :precondition (and (loc ?a) (loc ?b) (at ?a))
                       :effect (and (at ?b) (not (at ?a)))))";
        let t = task(
            d,
            "(define (problem p) (:domain t) (:objects l1 l2) (:init (loc l1) (loc l2) (at l1)) (:goal (at l2)))",
        );
        // go(l1,l1) and go(l2,l2) have no net effect and are dropped.
        let names: Vec<_> = t.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["go(l1,l2)", "go(l2,l1)"]);
        for a in &t.actions {
            assert!(a.del.iter().all(|p| !a.add.contains(p)));
        }
    }

    #[test]
    fn unreachable_actions_pruned() {
        let d = "(define (domain t) (:predicates (p) (q) (r))
                   (:action a :parameters () :precondition (p) :effect (q))
                   (:action b :parameters () :precondition (r) :effect (q)))";
        let t = task(d, "(define (problem x) (:domain t) (:init (p)) (:goal (q)))");
        assert_eq!(t.num_actions(), 1);
        assert_eq!(t.actions[0].name, "a()");
    }

    #[test]
    fn grounding_is_deterministic() {
        let a = task(suites::LOGISTICS_DOMAIN, suites::LOGISTICS_4_1);
        let b = task(suites::LOGISTICS_DOMAIN, suites::LOGISTICS_4_1);
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.props, b.props);
    }
}
