//! Brute-force oracles and random task generators shared by the test targets.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use parplan::pddl::load_task;
use parplan::suites::Instance;
use parplan::task::{GroundAction, TaskBuilder};
use parplan::Task;
use proptest::prelude::*;

pub fn load(i: &Instance) -> Task {
    load_task(i.domain, &i.problem).unwrap_or_else(|e| panic!("{}: {e}", i.name))
}

fn mask(ps: &[u32]) -> u64 {
    ps.iter().fold(0, |m, &p| m | 1 << p)
}

#[derive(Clone, Copy)]
struct Bits {
    pre: u64,
    add: u64,
    del: u64,
}

fn bits(a: &GroundAction) -> Bits {
    Bits {
        pre: mask(&a.pre),
        add: mask(&a.add),
        del: mask(&a.del),
    }
}

/// Order-free execution: neither action's effects touch the other's
/// preconditions and their effects are disjoint.
fn commute(x: Bits, y: Bits) -> bool {
    let ex = x.add | x.del;
    let ey = y.add | y.del;
    ex & (y.pre | ey) == 0 && ey & x.pre == 0
}

/// Optimal distances from the initial state over full states.
pub struct Oracle {
    /// Fewest parallel steps to reach each proposition.
    pub par_prop: Vec<Option<u32>>,
    pub par_goal: Option<u32>,
    /// Fewest actions to reach each proposition.
    pub seq_prop: Vec<Option<u32>>,
    pub seq_goal: Option<u32>,
}

fn bfs(n: usize, init: u64, goal: u64, succ: impl Fn(u64) -> Vec<u64>) -> (Vec<Option<u32>>, Option<u32>) {
    let mut dist: HashMap<u64, u32> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(init, 0);
    queue.push_back(init);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for t in succ(s) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(t) {
                e.insert(d + 1);
                queue.push_back(t);
            }
        }
    }
    let mut props = vec![None; n];
    let mut best_goal: Option<u32> = None;
    for (&s, &d) in &dist {
        for (p, slot) in props.iter_mut().enumerate() {
            if s & 1 << p != 0 && slot.is_none_or(|v: u32| d < v) {
                *slot = Some(d);
            }
        }
        if s & goal == goal && best_goal.is_none_or(|v| d < v) {
            best_goal = Some(d);
        }
    }
    (props, best_goal)
}

/// Exhaustive search; only for tasks with at most 64 propositions and a
/// small reachable state space.
pub fn oracle(task: &Task) -> Oracle {
    let n = task.num_props();
    assert!(n <= 64);
    let acts: Vec<Bits> = task.actions.iter().map(bits).collect();
    let init = mask(&task.init);
    let goal = mask(&task.goal);
    let step = |s: u64, set: &[usize]| {
        let del = set.iter().fold(0, |m, &a| m | acts[a].del);
        let add = set.iter().fold(0, |m, &a| m | acts[a].add);
        (s & !del) | add
    };
    let (seq_prop, seq_goal) = bfs(n, init, goal, |s| {
        (0..acts.len())
            .filter(|&a| acts[a].pre & s == acts[a].pre)
            .map(|a| step(s, &[a]))
            .collect()
    });
    let (par_prop, par_goal) = bfs(n, init, goal, |s| {
        let app: Vec<usize> = (0..acts.len()).filter(|&a| acts[a].pre & s == acts[a].pre).collect();
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        subsets(&acts, &app, 0, &mut chosen, &mut |set| out.push(step(s, set)));
        out
    });
    Oracle {
        par_prop,
        par_goal,
        seq_prop,
        seq_goal,
    }
}

fn subsets(acts: &[Bits], app: &[usize], from: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    for i in from..app.len() {
        let a = app[i];
        if chosen.iter().all(|&b| commute(acts[a], acts[b])) {
            chosen.push(a);
            f(chosen);
            subsets(acts, app, i + 1, chosen, f);
            chosen.pop();
        }
    }
}

/// Progression of a full state through one action; `None` if inapplicable.
pub fn progress(task: &Task, state: u64, a: u32) -> Option<u64> {
    let b = bits(task.action(a));
    (b.pre & state == b.pre).then_some((state & !b.del) | b.add)
}

pub fn state_mask(ps: &[u32]) -> u64 {
    mask(ps)
}

/// Every ordering of `items`.
pub fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Raw description of a small random STRIPS task, as bitmasks over `n` atoms.
#[derive(Debug, Clone)]
pub struct RawTask {
    pub n: usize,
    pub init: u16,
    pub goal: u16,
    pub actions: Vec<(u16, u16, u16)>,
}

fn r(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn names(n: usize, m: u16) -> Vec<String> {
    (0..n).filter(|i| m & 1 << i != 0).map(|i| format!("p{i}")).collect()
}

impl RawTask {
    pub fn build(&self) -> Task {
        let mut b = TaskBuilder::new();
        for i in 0..self.n {
            b.prop(&format!("p{i}"));
        }
        let init = names(self.n, self.init);
        let goal = names(self.n, self.goal);
        b = b.init(&r(&init)).goal(&r(&goal));
        for (i, &(pre, add, del)) in self.actions.iter().enumerate() {
            let (pre, add, del) = (names(self.n, pre), names(self.n, add), names(self.n, del));
            b = b.action(&format!("a{i}"), &r(&pre), &r(&add), &r(&del));
        }
        b.build("random")
    }
}

pub fn raw_task() -> impl Strategy<Value = RawTask> {
    (3usize..=8).prop_flat_map(|n| {
        let full = (1u16 << n) - 1;
        let m = move || (0..=full).prop_map(move |v| v & full);
        let one = move || (0..n).prop_map(|i| 1u16 << i);
        // Precondition density about 1/4, deletes about 1/8.
        let action = (m(), m(), one(), m(), m(), m(), m(), m())
            .prop_map(|(p1, p2, add, a1, a2, d1, d2, d3)| (p1 & p2, add | (a1 & a2 & d3), d1 & d2 & d3));
        (Just(n), m(), one(), m(), proptest::collection::vec(action, 1..11)).prop_map(|(n, init, g1, g2, actions)| {
            RawTask {
                n,
                init,
                goal: g1 | (g2 & !init),
                actions,
            }
        })
    })
}

/// Tasks whose atoms form levels: actions consume atoms below the one they
/// produce, so independent subgoals and parallel steps are common.
pub fn layered_task() -> impl Strategy<Value = RawTask> {
    (5usize..=10).prop_flat_map(|n| {
        let full = (1u16 << n) - 1;
        let action =
            (1..n, any::<u16>(), any::<u16>(), any::<u16>(), any::<u16>()).prop_map(move |(out, p1, p2, d1, d2)| {
                let below = (1u16 << out) - 1;
                let pre = p1 & p2 & below;
                (pre, 1 << out, d1 & d2 & (d1 >> 3) & full & !(1 << out))
            });
        (Just(n), 1u16..8, any::<u16>(), proptest::collection::vec(action, 2..14)).prop_map(
            move |(n, init, g, actions)| {
                let top = full & !((1u16 << (n / 2)) - 1);
                RawTask {
                    n,
                    init,
                    goal: (g & top).max(1 << (n - 1)),
                    actions,
                }
            },
        )
    })
}

/// Either generator.
pub fn any_task() -> impl Strategy<Value = RawTask> {
    prop_oneof![raw_task(), layered_task()]
}
