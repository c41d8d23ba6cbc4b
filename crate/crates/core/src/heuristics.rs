//! Set-level heuristics read off a planning graph.

use std::fmt;

use crate::graph::{LevelValue, PlanningGraph};
use crate::task::{ActionId, PropId};

/// A heuristic estimate; `Finite` orders below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeuristicValue {
    Finite(u32),
    Infinite,
}

impl HeuristicValue {
    pub fn finite(self) -> Option<u32> {
        match self {
            HeuristicValue::Finite(v) => Some(v),
            HeuristicValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == HeuristicValue::Infinite
    }
}

impl From<LevelValue> for HeuristicValue {
    fn from(l: LevelValue) -> Self {
        match l {
            LevelValue::Finite(k) => HeuristicValue::Finite(k),
            LevelValue::Infinite => HeuristicValue::Infinite,
        }
    }
}

impl fmt::Display for HeuristicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicValue::Finite(v) => write!(f, "{v}"),
            HeuristicValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Sum of the individual proposition levels.
pub fn h_sum(graph: &PlanningGraph, state: &[PropId]) -> HeuristicValue {
    let mut total = 0u32;
    for &p in state {
        match graph.lev_prop(p) {
            LevelValue::Finite(k) => total += k,
            LevelValue::Infinite => return HeuristicValue::Infinite,
        }
    }
    HeuristicValue::Finite(total)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedPlan {
    /// `steps[k]` holds the actions chosen in action layer `k`.
    pub steps: Vec<Vec<ActionId>>,
    pub length: usize,
}

/// Backward relaxed-plan extraction.
///
/// Each subgoal is handled at its own first level (earlier levels are reached
/// through noops). A subgoal at level `k` takes the supporter whose
/// preconditions all appear by `k - 1` with the smallest summed precondition
/// level, ties to the lowest id; an action already chosen at level `k` covers
/// every subgoal of that level it adds.
pub fn extract_relaxed_plan(graph: &PlanningGraph, state: &[PropId]) -> Option<RelaxedPlan> {
    let mut levels = Vec::with_capacity(state.len());
    for &p in state {
        levels.push(graph.lev_prop(p).finite()?);
    }
    let top = levels.iter().copied().max().unwrap_or(0) as usize;
    let mut buckets: Vec<Vec<PropId>> = vec![Vec::new(); top + 1];
    let mut queued = vec![u32::MAX; graph.num_props()];
    for (&p, &k) in state.iter().zip(&levels) {
        if queued[p as usize] == u32::MAX {
            queued[p as usize] = k;
            buckets[k as usize].push(p);
        }
    }
    let mut steps: Vec<Vec<ActionId>> = vec![Vec::new(); top];
    let mut covered = vec![usize::MAX; graph.num_props()];
    for k in (1..=top).rev() {
        let mut i = 0;
        while i < buckets[k].len() {
            let g = buckets[k][i];
            i += 1;
            if covered[g as usize] == k {
                continue;
            }
            let supporters = graph.supporters(g);
            // Within the built graph a supporter at level k - 1 always exists;
            // beyond the horizon the least-level supporter is used.
            let chosen = supporters.iter().find(|s| s.max_pre_level < k as u32).or_else(|| {
                supporters
                    .iter()
                    .min_by_key(|s| (s.max_pre_level, s.sum_pre_level, s.action))
            })?;
            let a = chosen.action;
            steps[k - 1].push(a);
            for &q in graph.action_add(a) {
                if queued[q as usize] == k as u32 || graph.lev_prop(q) == LevelValue::Finite(k as u32) {
                    covered[q as usize] = k;
                }
            }
            for &q in graph.action_pre(a) {
                let lq = graph.lev_prop(q).finite()? as usize;
                if lq > 0 && queued[q as usize] == u32::MAX {
                    queued[q as usize] = lq as u32;
                    buckets[lq.min(k)].push(q);
                }
            }
        }
    }
    for s in &mut steps {
        s.sort_unstable();
        s.dedup();
    }
    let length = steps.iter().map(Vec::len).sum();
    Some(RelaxedPlan { steps, length })
}

/// Relaxed-plan length plus the largest pairwise interaction degree.
pub fn h_adjsum2m(graph: &PlanningGraph, state: &[PropId]) -> HeuristicValue {
    let Some(rp) = extract_relaxed_plan(graph, state) else {
        return HeuristicValue::Infinite;
    };
    let mut max_delta = 0u32;
    for (i, &p) in state.iter().enumerate() {
        for &q in &state[i + 1..] {
            match graph.delta(p, q) {
                LevelValue::Finite(d) => max_delta = max_delta.max(d),
                LevelValue::Infinite => return HeuristicValue::Infinite,
            }
        }
    }
    HeuristicValue::Finite(rp.length as u32 + max_delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphMode, StopCondition};
    use crate::task::TaskBuilder;

    #[test]
    fn chain_relaxed_plan() {
        let t = TaskBuilder::new()
            .init(&["s"])
            .goal(&["g"])
            .action("a1", &["s"], &["m"], &[])
            .action("a2", &["m"], &["g"], &[])
            .build("chain");
        let g = build_graph(&t, GraphMode::Parallel, StopCondition::LevelOff).unwrap();
        let rp = extract_relaxed_plan(&g, &t.goal).unwrap();
        assert_eq!(rp.steps, vec![vec![0], vec![1]]);
        assert_eq!(rp.length, 2);
        assert_eq!(h_adjsum2m(&g, &t.goal), HeuristicValue::Finite(2));
        assert_eq!(h_sum(&g, &t.goal), HeuristicValue::Finite(2));
        assert_eq!(h_adjsum2m(&g, &t.init), HeuristicValue::Finite(0));
    }

    #[test]
    fn shared_supporter_counted_once() {
        let t = TaskBuilder::new()
            .init(&["s"])
            .goal(&["p", "q"])
            .action("both", &["s"], &["p", "q"], &[])
            .action("onlyp", &["s"], &["p"], &[])
            .build("share");
        let g = build_graph(&t, GraphMode::Parallel, StopCondition::LevelOff).unwrap();
        let rp = extract_relaxed_plan(&g, &t.goal).unwrap();
        assert_eq!(rp.length, 1);
    }

    #[test]
    fn unreachable_is_infinite() {
        let t = TaskBuilder::new()
            .init(&["s"])
            .goal(&["g"])
            .action("a", &["s"], &["m"], &[])
            .action("b", &["x"], &["g"], &[])
            .build("dead");
        let g = build_graph(&t, GraphMode::Parallel, StopCondition::LevelOff);
        assert!(g.is_err());
        let t2 = TaskBuilder::new()
            .init(&["s"])
            .goal(&["m"])
            .action("a", &["s"], &["m"], &[])
            .action("b", &["x"], &["g"], &[])
            .build("dead2");
        let g2 = build_graph(&t2, GraphMode::Parallel, StopCondition::LevelOff).unwrap();
        let gid = t2.prop_by_str("(g)").unwrap();
        assert_eq!(h_adjsum2m(&g2, &[gid]), HeuristicValue::Infinite);
        assert_eq!(h_sum(&g2, &[gid]), HeuristicValue::Infinite);
    }
}
