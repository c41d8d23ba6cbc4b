//! Node expansion: one child per relevant action, plus one parallel child
//! built by fattening the most promising action with independent ones.

use std::cmp::Reverse;

use crate::graph::PlanningGraph;
use crate::heuristics::{h_adjsum2m, HeuristicValue};
use crate::regression::{independent_ids, intersection_len, minus_union, regress, relevant_actions};
use crate::task::{ActionId, PropId, Task};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Child {
    pub state: Vec<PropId>,
    /// Sorted action set leading from the parent to this child.
    pub actions: Vec<ActionId>,
    pub h: HeuristicValue,
}

#[derive(Debug, Clone, Default)]
pub struct Expansion {
    pub children: Vec<Child>,
    pub pivot: Option<ActionId>,
    /// The fattened set when it grew past the pivot, otherwise empty.
    pub fattened: Vec<ActionId>,
}

/// Expands `state`. Singleton children come first in action-id order; the
/// fattened child, if any, is last.
pub fn parexand(task: &Task, graph: &PlanningGraph, state: &[PropId], fatten: bool) -> Expansion {
    let relevant = relevant_actions(task, state);
    if relevant.is_empty() {
        return Expansion::default();
    }
    let mut children: Vec<Child> = relevant
        .iter()
        .map(|&a| {
            let s = regress(task, state, a);
            let h = h_adjsum2m(graph, &s);
            Child {
                state: s,
                actions: vec![a],
                h,
            }
        })
        .collect();

    let lev = |p: PropId| graph.lev_prop(p);
    // How many relevant actions need each proposition.
    let mut pre_count = vec![0u32; task.num_props()];
    for &a in &relevant {
        for &p in &task.action(a).pre {
            pre_count[p as usize] += 1;
        }
    }
    let pivot_idx = (0..children.len())
        .filter(|&i| !children[i].h.is_infinite())
        .min_by_key(|&i| {
            let a = task.action(relevant[i]);
            let top = a
                .add
                .iter()
                .filter(|p| state.binary_search(p).is_ok())
                .map(|&p| lev(p))
                .max();
            let shared = a.pre.iter().filter(|&&p| pre_count[p as usize] >= 2).count();
            (children[i].h, Reverse(top), Reverse(shared), a.id)
        });
    let Some(pivot_idx) = pivot_idx else {
        return Expansion {
            children,
            pivot: None,
            fattened: Vec::new(),
        };
    };
    let pivot = relevant[pivot_idx];
    if !fatten {
        return Expansion {
            children,
            pivot: Some(pivot),
            fattened: Vec::new(),
        };
    }

    let mut set = vec![pivot];
    let mut cur_state = children[pivot_idx].state.clone();
    let mut cur_h = children[pivot_idx].h;
    let mut set_pre: Vec<PropId> = task.action(pivot).pre.clone();
    let mut set_add: Vec<PropId> = task.action(pivot).add.clone();

    let mut order: Vec<PropId> = state.to_vec();
    order.sort_by_key(|&p| (Reverse(lev(p)), p));
    for g in order {
        if set_add.binary_search(&g).is_ok() {
            continue;
        }
        let mut best: Option<(HeuristicValue, Reverse<usize>, ActionId, Vec<PropId>)> = None;
        for &a in task.achievers(g) {
            if relevant.binary_search(&a).is_err()
                || set.contains(&a)
                || !set.iter().all(|&o| independent_ids(task, a, o))
            {
                continue;
            }
            let act = task.action(a);
            // a is independent of the set, so it cannot add a set precondition
            // and regression can proceed incrementally.
            let s = minus_union(&cur_state, &act.add, &act.pre);
            let h = h_adjsum2m(graph, &s);
            let key = (h, Reverse(intersection_len(&act.pre, &set_pre)), a);
            if best.as_ref().is_none_or(|b| key < (b.0, b.1, b.2)) {
                best = Some((key.0, key.1, key.2, s));
            }
        }
        if let Some((h, _, a, s)) = best {
            if h < cur_h {
                set.push(a);
                cur_state = s;
                cur_h = h;
                let act = task.action(a);
                set_pre = minus_union(&set_pre, &[], &act.pre);
                set_add = minus_union(&set_add, &[], &act.add);
            }
        }
    }
    let fattened = if set.len() > 1 {
        set.sort_unstable();
        children.push(Child {
            state: cur_state,
            actions: set.clone(),
            h: cur_h,
        });
        set
    } else {
        Vec::new()
    };
    Expansion {
        children,
        pivot: Some(pivot),
        fattened,
    }
}
