//! Regression of subgoal sets through actions and action sets.
//!
//! States are sorted, duplicate-free `Vec<PropId>`.

use crate::task::{ActionId, GroundAction, PropId, Task};

pub(crate) fn intersects(a: &[PropId], b: &[PropId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

pub(crate) fn intersection_len(a: &[PropId], b: &[PropId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `(s \ remove) ∪ extra`, all sorted.
pub(crate) fn minus_union(s: &[PropId], remove: &[PropId], extra: &[PropId]) -> Vec<PropId> {
    let mut out: Vec<PropId> = s.iter().copied().filter(|p| remove.binary_search(p).is_err()).collect();
    out.extend_from_slice(extra);
    out.sort_unstable();
    out.dedup();
    out
}

/// An action is relevant to `state` if it adds some subgoal and deletes none.
pub fn is_relevant(action: &GroundAction, state: &[PropId]) -> bool {
    intersects(&action.add, state) && !intersects(&action.del, state)
}

/// Relevant actions for `state`, in id order.
pub fn relevant_actions(task: &Task, state: &[PropId]) -> Vec<ActionId> {
    let mut out: Vec<ActionId> = state.iter().flat_map(|&p| task.achievers(p).iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out.retain(|&a| !intersects(&task.action(a).del, state));
    out
}

/// `Regress(S, a) = (S \ add(a)) ∪ pre(a)`.
pub fn regress(task: &Task, state: &[PropId], a: ActionId) -> Vec<PropId> {
    let act = task.action(a);
    minus_union(state, &act.add, &act.pre)
}

/// Regression through a set of pairwise independent actions:
/// `(S \ ∪ add) ∪ (∪ pre)`.
pub fn regress_set(task: &Task, state: &[PropId], actions: &[ActionId]) -> Vec<PropId> {
    let mut add: Vec<PropId> = actions
        .iter()
        .flat_map(|&a| task.action(a).add.iter().copied())
        .collect();
    add.sort_unstable();
    add.dedup();
    let pre: Vec<PropId> = actions
        .iter()
        .flat_map(|&a| task.action(a).pre.iter().copied())
        .collect();
    minus_union(state, &add, &pre)
}

/// Two distinct actions are independent when neither's effects touch the
/// other's preconditions and their effects do not overlap.
pub fn independent(x: &GroundAction, y: &GroundAction) -> bool {
    if x.id == y.id {
        return false;
    }
    let touches = |a: &GroundAction, set: &[PropId]| intersects(&a.add, set) || intersects(&a.del, set);
    !touches(x, &y.pre) && !touches(x, &y.add) && !touches(x, &y.del) && !touches(y, &x.pre)
}

pub fn independent_ids(task: &Task, a: ActionId, b: ActionId) -> bool {
    independent(task.action(a), task.action(b))
}

/// Whether every pair in `actions` is independent.
pub fn pairwise_independent(task: &Task, actions: &[ActionId]) -> bool {
    actions
        .iter()
        .enumerate()
        .all(|(i, &a)| actions[i + 1..].iter().all(|&b| independent_ids(task, a, b)))
}
