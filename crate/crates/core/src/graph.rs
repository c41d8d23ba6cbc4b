//! Leveled planning graph with binary mutexes, in parallel or serial mode.
//!
//! Action ids `0..A` are the task's ground actions; ids `A..A+P` are the
//! explicit noops, `A + p` carrying proposition `p` forward.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::task::{PropId, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    Parallel,
    Serial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StopCondition {
    /// Stop at the first level where all goals are present and pairwise non-mutex.
    GoalsNonMutex,
    /// Grow until two consecutive levels are identical.
    LevelOff,
}

/// A level index or `Infinite`. `Finite` values order below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevelValue {
    Finite(u32),
    Infinite,
}

impl LevelValue {
    pub fn finite(self) -> Option<u32> {
        match self {
            LevelValue::Finite(k) => Some(k),
            LevelValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == LevelValue::Infinite
    }
}

impl fmt::Display for LevelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelValue::Finite(k) => write!(f, "{k}"),
            LevelValue::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("goals unreachable: graph leveled off at level {level} ({reason})")]
    GoalsUnreachable { level: usize, reason: String },
}

const NO_LEVEL: u16 = u16::MAX;

#[derive(Debug, Clone)]
pub struct PlanningGraph {
    mode: GraphMode,
    num_props: usize,
    num_actions: usize,
    pre: Vec<Vec<PropId>>,
    add: Vec<Vec<PropId>>,
    prop_layers: Vec<FixedBitSet>,
    action_layers: Vec<FixedBitSet>,
    prop_mutex: Vec<Vec<FixedBitSet>>,
    action_mutex: Vec<Vec<FixedBitSet>>,
    leveled_off: bool,
    prop_level: Vec<u32>,
    /// First level at which a pair is present and non-mutex; `NO_LEVEL` if
    /// that never happens within the built levels.
    pair_level: Vec<u16>,
    /// Per proposition: real achievers sorted by (Σ precondition level, id),
    /// with their max precondition level.
    supporters: Vec<Vec<Supporter>>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Supporter {
    pub action: u32,
    pub max_pre_level: u32,
    pub sum_pre_level: u32,
}

/// Interference is a property of the action pair alone, so it is computed once.
fn static_interference(task: &Task, m: usize) -> Vec<FixedBitSet> {
    let n = task.num_props();
    let a_count = task.num_actions();
    let mut users = vec![FixedBitSet::with_capacity(m); n];
    let mut deleters = vec![FixedBitSet::with_capacity(m); n];
    for a in &task.actions {
        for &p in a.pre.iter().chain(&a.add) {
            users[p as usize].insert(a.id as usize);
        }
        for &p in &a.del {
            deleters[p as usize].insert(a.id as usize);
        }
    }
    for (p, u) in users.iter_mut().enumerate() {
        u.insert(a_count + p);
    }
    let mut rows = vec![FixedBitSet::with_capacity(m); m];
    for a in &task.actions {
        let row = &mut rows[a.id as usize];
        for &p in &a.del {
            row.union_with(&users[p as usize]);
        }
        for &p in a.pre.iter().chain(&a.add) {
            row.union_with(&deleters[p as usize]);
        }
    }
    for p in 0..n {
        let row = &mut rows[a_count + p];
        row.union_with(&deleters[p]);
    }
    rows
}

struct Builder<'t> {
    task: &'t Task,
    mode: GraphMode,
    m: usize,
    interference: Vec<FixedBitSet>,
    /// Actions having `p` as a precondition.
    pre_users: Vec<FixedBitSet>,
    /// Actions adding `p` (including its noop).
    achievers: Vec<FixedBitSet>,
    real: FixedBitSet,
    /// Preconditions of every graph action, noops included.
    pre_all: Vec<Vec<PropId>>,
    exhaustive: bool,
}

impl Builder<'_> {
    fn pre(&self, a: usize) -> &[PropId] {
        &self.pre_all[a]
    }

    fn applicable(&self, props: &FixedBitSet, mutex: &[FixedBitSet], a: usize) -> bool {
        let pre = self.pre(a);
        if !pre.iter().all(|&p| props.contains(p as usize)) {
            return false;
        }
        for (i, &p) in pre.iter().enumerate() {
            for &q in &pre[i + 1..] {
                if mutex[p as usize].contains(q as usize) {
                    return false;
                }
            }
        }
        true
    }

    fn action_layer(&self, props: &FixedBitSet, mutex: &[FixedBitSet]) -> FixedBitSet {
        let mut layer = FixedBitSet::with_capacity(self.m);
        for a in 0..self.m {
            if self.applicable(props, mutex, a) {
                layer.insert(a);
            }
        }
        layer
    }

    fn action_mutexes(&self, layer: &FixedBitSet, prop_mutex: &[FixedBitSet]) -> Vec<FixedBitSet> {
        let n = self.task.num_props();
        let mut rows = vec![FixedBitSet::with_capacity(self.m); self.m];
        let real_in_layer = {
            let mut r = self.real.clone();
            r.intersect_with(layer);
            r
        };
        for a in layer.ones() {
            let mut row = self.interference[a].clone();
            let mut conflicting = FixedBitSet::with_capacity(n);
            for &p in self.pre(a) {
                conflicting.union_with(&prop_mutex[p as usize]);
            }
            for q in conflicting.ones() {
                row.union_with(&self.pre_users[q]);
            }
            if self.mode == GraphMode::Serial && self.real.contains(a) {
                row.union_with(&real_in_layer);
            }
            row.intersect_with(layer);
            row.set(a, false);
            rows[a] = row;
        }
        // Competing needs is symmetric by construction; serial rows for noops
        // must not pick up the blanket relation, so symmetrize explicitly.
        for a in layer.ones() {
            let partners: Vec<usize> = rows[a].ones().collect();
            for b in partners {
                rows[b].insert(a);
            }
        }
        rows
    }

    fn prop_mutexes(
        &self,
        props: &FixedBitSet,
        prev_props: &FixedBitSet,
        prev_mutex: &[FixedBitSet],
        layer: &FixedBitSet,
        action_mutex: &[FixedBitSet],
    ) -> Vec<FixedBitSet> {
        let n = self.task.num_props();
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        let mut supported = vec![FixedBitSet::with_capacity(self.m); n];
        for p in props.ones() {
            let mut s = self.achievers[p].clone();
            s.intersect_with(layer);
            supported[p] = s;
        }
        for p in props.ones() {
            // Every action that is non-mutex with some supporter of p.
            let mut partners = FixedBitSet::with_capacity(self.m);
            for a in supported[p].ones() {
                let mut nm = layer.clone();
                nm.difference_with(&action_mutex[a]);
                partners.union_with(&nm);
            }
            // Mutexes only relax from one level to the next, so only pairs
            // that were mutex (or involve a new proposition) need rechecking.
            let candidates: Vec<usize> = if self.exhaustive || !prev_props.contains(p) {
                props.ones().collect()
            } else {
                let mut c = prev_mutex[p].clone();
                let mut fresh = props.clone();
                fresh.difference_with(prev_props);
                c.union_with(&fresh);
                c.intersect_with(props);
                c.ones().collect()
            };
            for q in candidates {
                if q != p && partners.is_disjoint(&supported[q]) {
                    rows[p].insert(q);
                }
            }
        }
        rows
    }
}

/// Builds the planning graph from the task's initial state.
pub fn build_graph(task: &Task, mode: GraphMode, stop: StopCondition) -> Result<PlanningGraph, GraphError> {
    build_graph_with(task, mode, stop, false)
}

/// As [`build_graph`]; `exhaustive` disables the incremental mutex recheck.
pub fn build_graph_with(
    task: &Task,
    mode: GraphMode,
    stop: StopCondition,
    exhaustive: bool,
) -> Result<PlanningGraph, GraphError> {
    let n = task.num_props();
    let a_count = task.num_actions();
    let m = a_count + n;
    let mut pre_users = vec![FixedBitSet::with_capacity(m); n];
    let mut achievers = vec![FixedBitSet::with_capacity(m); n];
    for a in &task.actions {
        for &p in &a.pre {
            pre_users[p as usize].insert(a.id as usize);
        }
        for &p in &a.add {
            achievers[p as usize].insert(a.id as usize);
        }
    }
    for p in 0..n {
        pre_users[p].insert(a_count + p);
        achievers[p].insert(a_count + p);
    }
    let mut real = FixedBitSet::with_capacity(m);
    real.insert_range(0..a_count);
    let b = Builder {
        task,
        mode,
        m,
        interference: static_interference(task, m),
        pre_users,
        achievers,
        real,
        pre_all: task
            .actions
            .iter()
            .map(|a| a.pre.clone())
            .chain((0..n).map(|p| vec![p as PropId]))
            .collect(),
        exhaustive,
    };

    let mut props0 = FixedBitSet::with_capacity(n);
    for &p in &task.init {
        props0.insert(p as usize);
    }
    let mut prop_layers = vec![props0];
    let mut prop_mutex = vec![vec![FixedBitSet::with_capacity(n); n]];
    let mut action_layers = Vec::new();
    let mut action_mutex = Vec::new();
    let mut leveled_off = false;

    let goals_ok = |props: &FixedBitSet, mutex: &[FixedBitSet]| -> Result<(), String> {
        for (i, &g) in task.goal.iter().enumerate() {
            if !props.contains(g as usize) {
                return Err(format!("goal {} absent", task.prop_name(g)));
            }
            for &h in &task.goal[i + 1..] {
                if mutex[g as usize].contains(h as usize) {
                    return Err(format!("goals {} and {} mutex", task.prop_name(g), task.prop_name(h)));
                }
            }
        }
        Ok(())
    };

    loop {
        let k = prop_layers.len() - 1;
        if stop == StopCondition::GoalsNonMutex && goals_ok(&prop_layers[k], &prop_mutex[k]).is_ok() {
            break;
        }
        if leveled_off {
            break;
        }
        let layer = b.action_layer(&prop_layers[k], &prop_mutex[k]);
        let amutex = b.action_mutexes(&layer, &prop_mutex[k]);
        let mut next = prop_layers[k].clone();
        for a in layer.ones() {
            let adds: &[PropId] = if a < a_count { &task.actions[a].add } else { &[] };
            for &p in adds {
                next.insert(p as usize);
            }
        }
        let pmutex = b.prop_mutexes(&next, &prop_layers[k], &prop_mutex[k], &layer, &amutex);
        leveled_off = next == prop_layers[k] && pmutex == prop_mutex[k];
        action_layers.push(layer);
        action_mutex.push(amutex);
        prop_layers.push(next);
        prop_mutex.push(pmutex);
    }

    let last = prop_layers.len() - 1;
    if let Err(reason) = goals_ok(&prop_layers[last], &prop_mutex[last]) {
        return Err(GraphError::GoalsUnreachable { level: last, reason });
    }
    Ok(PlanningGraph::finish(
        task,
        mode,
        prop_layers,
        action_layers,
        prop_mutex,
        action_mutex,
        leveled_off,
    ))
}

impl PlanningGraph {
    fn finish(
        task: &Task,
        mode: GraphMode,
        prop_layers: Vec<FixedBitSet>,
        action_layers: Vec<FixedBitSet>,
        prop_mutex: Vec<Vec<FixedBitSet>>,
        action_mutex: Vec<Vec<FixedBitSet>>,
        leveled_off: bool,
    ) -> PlanningGraph {
        let n = task.num_props();
        let horizon = prop_layers.len() - 1;
        let mut prop_level = vec![u32::MAX; n];
        for (k, layer) in prop_layers.iter().enumerate() {
            for p in layer.ones() {
                if prop_level[p] == u32::MAX {
                    prop_level[p] = k as u32;
                }
            }
        }
        // Last level at which each pair is mutex.
        let mut last_mutex = vec![NO_LEVEL; n * n];
        for (k, rows) in prop_mutex.iter().enumerate() {
            for (p, row) in rows.iter().enumerate() {
                for q in row.ones() {
                    last_mutex[p * n + q] = k as u16;
                }
            }
        }
        let mut pair_level = vec![NO_LEVEL; n * n];
        for p in 0..n {
            for q in 0..n {
                if prop_level[p] == u32::MAX || prop_level[q] == u32::MAX {
                    continue;
                }
                let both = prop_level[p].max(prop_level[q]) as usize;
                let lm = last_mutex[p * n + q];
                let level = if lm == NO_LEVEL {
                    both
                } else {
                    both.max(lm as usize + 1)
                };
                if level <= horizon {
                    pair_level[p * n + q] = level as u16;
                }
            }
        }
        let mut g = PlanningGraph {
            mode,
            num_props: n,
            num_actions: task.num_actions(),
            pre: task.actions.iter().map(|a| a.pre.clone()).collect(),
            add: task.actions.iter().map(|a| a.add.clone()).collect(),
            prop_layers,
            action_layers,
            prop_mutex,
            action_mutex,
            leveled_off,
            prop_level,
            pair_level,
            supporters: Vec::new(),
        };
        let mut supporters: Vec<Vec<Supporter>> = vec![Vec::new(); n];
        for a in &task.actions {
            let levels: Vec<LevelValue> = a.pre.iter().map(|&p| g.lev_prop(p)).collect();
            if levels.iter().any(|l| l.is_infinite()) {
                continue;
            }
            let lv = |l: &LevelValue| l.finite().unwrap();
            let s = Supporter {
                action: a.id,
                max_pre_level: levels.iter().map(lv).max().unwrap_or(0),
                sum_pre_level: levels.iter().map(lv).sum(),
            };
            for &p in &a.add {
                supporters[p as usize].push(s);
            }
        }
        for list in &mut supporters {
            list.sort_by_key(|s| (s.sum_pre_level, s.action));
        }
        g.supporters = supporters;
        g
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn leveled_off(&self) -> bool {
        self.leveled_off
    }

    /// Index of the last proposition layer.
    pub fn horizon(&self) -> usize {
        self.prop_layers.len() - 1
    }

    pub fn num_levels(&self) -> usize {
        self.prop_layers.len()
    }

    pub fn num_props(&self) -> usize {
        self.num_props
    }

    pub fn props_at(&self, level: usize) -> &FixedBitSet {
        &self.prop_layers[level]
    }

    /// Actions (including noops) in the action layer between `level` and `level + 1`.
    pub fn actions_at(&self, level: usize) -> &FixedBitSet {
        &self.action_layers[level]
    }

    pub fn noop_id(&self, p: PropId) -> usize {
        self.num_actions + p as usize
    }

    pub fn props_mutex(&self, level: usize, p: PropId, q: PropId) -> bool {
        self.prop_mutex[level][p as usize].contains(q as usize)
    }

    pub fn actions_mutex(&self, level: usize, a: usize, b: usize) -> bool {
        self.action_mutex[level][a].contains(b)
    }

    fn beyond(&self) -> LevelValue {
        if self.leveled_off {
            LevelValue::Infinite
        } else {
            LevelValue::Finite(self.horizon() as u32 + 1)
        }
    }

    /// First level containing `p`. Past the built horizon this is `horizon + 1`
    /// unless the graph leveled off, in which case it is `Infinite`.
    pub fn lev_prop(&self, p: PropId) -> LevelValue {
        match self.prop_level[p as usize] {
            u32::MAX => self.beyond(),
            k => LevelValue::Finite(k),
        }
    }

    pub fn lev_pair(&self, p: PropId, q: PropId) -> LevelValue {
        if p == q {
            return self.lev_prop(p);
        }
        match self.pair_level[p as usize * self.num_props + q as usize] {
            NO_LEVEL => self.beyond(),
            k => LevelValue::Finite(k as u32),
        }
    }

    /// First level where all of `set` is present and pairwise non-mutex.
    pub fn lev_set(&self, set: &[PropId]) -> LevelValue {
        let mut level = LevelValue::Finite(0);
        for (i, &p) in set.iter().enumerate() {
            level = level.max(self.lev_prop(p));
            for &q in &set[i + 1..] {
                level = level.max(self.lev_pair(p, q));
            }
            if level.is_infinite() {
                break;
            }
        }
        level
    }

    /// Interaction degree `lev({p,q}) - max(lev(p), lev(q))`.
    pub fn delta(&self, p: PropId, q: PropId) -> LevelValue {
        if p == q {
            return LevelValue::Finite(0);
        }
        let (LevelValue::Finite(lp), LevelValue::Finite(lq), LevelValue::Finite(lpq)) =
            (self.lev_prop(p), self.lev_prop(q), self.lev_pair(p, q))
        else {
            return LevelValue::Infinite;
        };
        LevelValue::Finite(lpq - lp.max(lq))
    }

    pub(crate) fn supporters(&self, p: PropId) -> &[Supporter] {
        &self.supporters[p as usize]
    }

    pub(crate) fn action_pre(&self, a: u32) -> &[PropId] {
        &self.pre[a as usize]
    }

    pub(crate) fn action_add(&self, a: u32) -> &[PropId] {
        &self.add[a as usize]
    }

    /// One block per level: proposition, action and mutex counts.
    pub fn dump(&self, task: &Task) -> String {
        let mut out = format!(
            "planning graph ({:?}, {} levels{})\n",
            self.mode,
            self.num_levels(),
            if self.leveled_off { ", leveled off" } else { "" }
        );
        for k in 0..self.num_levels() {
            let pm: usize = self.prop_mutex[k].iter().map(|r| r.count_ones(..)).sum::<usize>() / 2;
            out.push_str(&format!(
                "level {k}: {} props, {pm} prop mutex pairs\n",
                self.prop_layers[k].count_ones(..)
            ));
            let mut names: Vec<String> = self.prop_layers[k]
                .ones()
                .filter(|&p| self.prop_level[p] == k as u32)
                .map(|p| task.prop_name(p as PropId))
                .collect();
            names.sort();
            if !names.is_empty() {
                out.push_str(&format!("  new: {}\n", names.join(" ")));
            }
            if k < self.action_layers.len() {
                let layer = &self.action_layers[k];
                let real = layer.ones().filter(|&a| a < self.num_actions).count();
                let am: usize = layer
                    .ones()
                    .map(|a| self.action_mutex[k][a].count_ones(..))
                    .sum::<usize>()
                    / 2;
                out.push_str(&format!(
                    "  actions: {real} (+{} noops), {am} action mutex pairs\n",
                    layer.count_ones(..) - real
                ));
            }
        }
        out
    }
}
