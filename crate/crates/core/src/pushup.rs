//! Moving actions of a leaf's incoming set up to ancestor sets, so that they
//! execute later in the plan and the branch gets shorter.

use serde::Serialize;

use crate::regression::{independent_ids, intersects, regress_set};
use crate::task::{ActionId, PropId, Task};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PushupMove {
    pub action: ActionId,
    pub from_depth: usize,
    pub to_depth: usize,
}

/// A root-to-leaf chain. `states[0]` is the root and `sets[d]` is the action
/// set leading from `states[d - 1]` to `states[d]`; `sets[0]` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub states: Vec<Vec<PropId>>,
    pub sets: Vec<Vec<ActionId>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushupResult {
    pub branch: Branch,
    pub moves: Vec<PushupMove>,
    /// Shallowest depth whose state changed.
    pub first_changed: usize,
}

/// Whether `a` can join `ancestor_set`, the set applied to `ancestor_state`:
/// it adds a subgoal of that state, deletes none, and is independent of
/// every action already in the set.
pub fn applicable_to_ancestor(task: &Task, a: ActionId, ancestor_state: &[PropId], ancestor_set: &[ActionId]) -> bool {
    let act = task.action(a);
    intersects(&act.add, ancestor_state)
        && !intersects(&act.del, ancestor_state)
        && ancestor_set.iter().all(|&b| independent_ids(task, a, b))
}

/// Pushes each action of the leaf set as high as it can go by a contiguous
/// upward walk, then rebuilds the states below the highest target. If the leaf
/// set empties the leaf is dropped and its parent is treated the same way.
/// Returns `None` when nothing moves.
pub fn pushup_branch(task: &Task, branch: &Branch) -> Option<PushupResult> {
    let mut states = branch.states.clone();
    let mut sets = branch.sets.clone();
    let mut moves = Vec::new();
    let mut first_changed = usize::MAX;
    loop {
        let k = states.len() - 1;
        if k < 2 {
            break;
        }
        for a in sets[k].clone() {
            let mut target = None;
            for j in (1..k).rev() {
                if applicable_to_ancestor(task, a, &states[j - 1], &sets[j]) {
                    target = Some(j);
                } else {
                    break;
                }
            }
            let Some(j) = target else { continue };
            sets[k].retain(|&x| x != a);
            sets[j].push(a);
            sets[j].sort_unstable();
            for d in j..=k {
                states[d] = regress_set(task, &states[d - 1], &sets[d]);
            }
            first_changed = first_changed.min(j);
            moves.push(PushupMove {
                action: a,
                from_depth: k,
                to_depth: j,
            });
        }
        if sets[k].is_empty() {
            states.pop();
            sets.pop();
        } else {
            break;
        }
    }
    if moves.is_empty() {
        return None;
    }
    Some(PushupResult {
        branch: Branch { states, sets },
        moves,
        first_changed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::TaskBuilder;

    /// Goal {p, q}; b achieves q late in a sequential chain and can be pushed
    /// into the set that achieves p.
    fn task() -> Task {
        TaskBuilder::new()
            .init(&["i"])
            .goal(&["p", "q"])
            .action("a", &["m"], &["p"], &[])
            .action("c", &["i"], &["m"], &[])
            .action("b", &["i"], &["q"], &[])
            .build("push")
    }

    fn chain(t: &Task, sets: &[&[ActionId]]) -> Branch {
        let mut states = vec![t.goal.clone()];
        let mut all = vec![Vec::new()];
        for s in sets {
            let next = regress_set(t, states.last().unwrap(), s);
            states.push(next);
            all.push(s.to_vec());
        }
        Branch { states, sets: all }
    }

    #[test]
    fn moves_to_highest_ancestor_and_collapses() {
        let t = task();
        // Goal <-a- {m,q} <-c- {i,q} <-b- {i}
        let b = chain(&t, &[&[0], &[1], &[2]]);
        let r = pushup_branch(&t, &b).unwrap();
        assert_eq!(
            r.moves,
            vec![PushupMove {
                action: 2,
                from_depth: 3,
                to_depth: 1
            }]
        );
        assert_eq!(r.branch.sets, vec![vec![], vec![0, 2], vec![1]]);
        assert!(t.satisfied_by_init(r.branch.states.last().unwrap()));
        assert_eq!(r.first_changed, 1);
    }

    #[test]
    fn idempotent() {
        let t = task();
        let b = chain(&t, &[&[0], &[1], &[2]]);
        let r = pushup_branch(&t, &b).unwrap();
        assert!(pushup_branch(&t, &r.branch).is_none());
    }

    #[test]
    fn dependent_action_stays() {
        let t = TaskBuilder::new()
            .init(&["i"])
            .goal(&["p", "q"])
            .action("a", &["m"], &["p"], &[])
            .action("c", &["i"], &["m"], &[])
            .action("b", &["i"], &["q"], &["m"])
            .build("stay");
        let b = chain(&t, &[&[0], &[1], &[2]]);
        // b deletes m, a precondition of a, so it may not run after c.
        assert!(pushup_branch(&t, &b).is_none());
    }
}
