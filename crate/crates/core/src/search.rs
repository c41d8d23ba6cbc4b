//! Regression search: greedy descent while the heuristic strictly improves,
//! falling back to weighted A* over the open list.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::expand::parexand;
use crate::graph::{build_graph, GraphMode, PlanningGraph, StopCondition};
use crate::heuristics::{h_adjsum2m, HeuristicValue};
use crate::plan::ParallelPlan;
use crate::pushup::{applicable_to_ancestor, pushup_branch, Branch, PushupMove};
use crate::task::{ActionId, PropId, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PushupMode {
    Off,
    On,
    Aggressive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub weight: f64,
    pub fattening: bool,
    pub pushup: PushupMode,
    pub graph_mode: GraphMode,
    pub stop: StopCondition,
    pub node_budget: u64,
    pub time_budget: Duration,
    pub trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            weight: 5.0,
            fattening: true,
            pushup: PushupMode::On,
            graph_mode: GraphMode::Parallel,
            stop: StopCondition::GoalsNonMutex,
            node_budget: 1_000_000,
            time_budget: Duration::from_secs(300),
            trace: false,
        }
    }
}

impl SearchConfig {
    /// Serial graph, no fattening, no pushup: a sequential regression planner.
    pub fn sequential() -> Self {
        SearchConfig {
            fattening: false,
            pushup: PushupMode::Off,
            graph_mode: GraphMode::Serial,
            ..SearchConfig::default()
        }
    }

    /// Short stable description of the knobs that affect the plan.
    pub fn fingerprint(&self) -> String {
        format!(
            "graph={};fatten={};pushup={};w={};stop={}",
            match self.graph_mode {
                GraphMode::Parallel => "parallel",
                GraphMode::Serial => "serial",
            },
            if self.fattening { "on" } else { "off" },
            match self.pushup {
                PushupMode::Off => "off",
                PushupMode::On => "on",
                PushupMode::Aggressive => "aggressive",
            },
            self.weight,
            match self.stop {
                StopCondition::GoalsNonMutex => "goals",
                StopCondition::LevelOff => "leveloff",
            }
        )
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state: Vec<PropId>,
    /// Action set applied (in regression) to the parent to obtain this node.
    pub incoming: Vec<ActionId>,
    pub parent: Option<NodeId>,
    pub g: u32,
    pub h: HeuristicValue,
}

#[derive(Debug, Clone, Default)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
}

impl SearchTree {
    pub fn add(&mut self, node: SearchNode) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node ids from the root down to `leaf`.
    pub fn chain(&self, leaf: NodeId) -> Vec<NodeId> {
        let mut out = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// The plan read from `leaf` back to the root: the leaf's incoming set
    /// executes first.
    pub fn plan_from(&self, leaf: NodeId) -> ParallelPlan {
        let mut steps = Vec::new();
        let mut cur = leaf;
        while let Some(p) = self.nodes[cur].parent {
            steps.push(self.nodes[cur].incoming.clone());
            cur = p;
        }
        ParallelPlan::new(steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetKind {
    Nodes,
    Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Solved(ParallelPlan),
    /// The open list ran dry, or the graph proved the goals unreachable.
    Exhausted,
    Budget(BudgetKind),
}

impl Outcome {
    pub fn plan(&self) -> Option<&ParallelPlan> {
        match self {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Solved(_) => "solved",
            Outcome::Exhausted => "exhausted",
            Outcome::Budget(_) => "budget",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub pushups: u64,
    pub pushup_moves: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    Root,
    Greedy,
    BestFirst,
    PushupBranch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceMove {
    pub action: String,
    pub from_depth: usize,
    pub to_depth: usize,
}

/// One record per expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub expansion: u64,
    pub selection: Selection,
    /// The node picked from the open list or by descent, before pushup.
    pub selected: NodeId,
    pub selected_h: Option<u32>,
    /// For greedy picks, the heuristic of the node that generated it.
    pub parent_h: Option<u32>,
    pub pushup: Vec<TraceMove>,
    /// The node actually expanded (differs from `selected` after pushup).
    pub expanded: NodeId,
    pub g: u32,
    pub h: Option<u32>,
    pub state_size: usize,
    pub pivot: Option<String>,
    pub fattened: Vec<String>,
    pub children: usize,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    h: u32,
    id: NodeId,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // Reversed so that BinaryHeap pops the smallest (f, h, id).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.h.cmp(&self.h))
            .then(other.id.cmp(&self.id))
    }
}

struct Searcher<'a> {
    task: &'a Task,
    graph: &'a PlanningGraph,
    config: &'a SearchConfig,
    tree: SearchTree,
    open: BinaryHeap<OpenEntry>,
    closed: HashMap<Vec<PropId>, u32>,
    stats: SearchStats,
    trace: Vec<TraceRecord>,
    start: Instant,
}

impl Searcher<'_> {
    fn f(&self, g: u32, h: u32) -> f64 {
        g as f64 + self.config.weight * h as f64
    }

    fn push_open(&mut self, id: NodeId) {
        let n = self.tree.node(id);
        if let HeuristicValue::Finite(h) = n.h {
            let f = self.f(n.g, h);
            self.open.push(OpenEntry { f, h, id });
        }
    }

    fn is_closed(&self, state: &[PropId], g: u32) -> bool {
        self.closed.get(state).is_some_and(|&c| c <= g)
    }

    fn out_of_budget(&self) -> Option<BudgetKind> {
        if self.stats.expansions >= self.config.node_budget {
            Some(BudgetKind::Nodes)
        } else if self.start.elapsed() >= self.config.time_budget {
            Some(BudgetKind::Time)
        } else {
            None
        }
    }

    fn pop_open(&mut self) -> Option<NodeId> {
        while let Some(e) = self.open.pop() {
            let n = self.tree.node(e.id);
            if !self.is_closed(&n.state, n.g) {
                return Some(e.id);
            }
        }
        None
    }

    /// Rebuilds the branch above `leaf` after pushup; returns the new leaf and
    /// the new interior nodes, top-down.
    fn pushup(&mut self, leaf: NodeId) -> Option<(NodeId, Vec<NodeId>, Vec<PushupMove>)> {
        // The upward walk starts at the parent's set; if no leaf action fits
        // there, nothing can move.
        let node = self.tree.node(leaf);
        let parent = self.tree.node(node.parent?);
        let above = self.tree.node(parent.parent?);
        if !node
            .incoming
            .iter()
            .any(|&a| applicable_to_ancestor(self.task, a, &above.state, &parent.incoming))
        {
            return None;
        }
        let chain = self.tree.chain(leaf);
        let branch = Branch {
            states: chain.iter().map(|&id| self.tree.node(id).state.clone()).collect(),
            sets: chain.iter().map(|&id| self.tree.node(id).incoming.clone()).collect(),
        };
        let result = pushup_branch(self.task, &branch)?;
        let hs: Vec<HeuristicValue> = result.branch.states[result.first_changed..]
            .iter()
            .map(|s| h_adjsum2m(self.graph, s))
            .collect();
        if hs.iter().any(|h| h.is_infinite()) {
            return None;
        }
        let mut parent = chain[result.first_changed - 1];
        let mut created = Vec::new();
        for (d, h) in (result.first_changed..result.branch.states.len()).zip(hs) {
            parent = self.tree.add(SearchNode {
                state: result.branch.states[d].clone(),
                incoming: result.branch.sets[d].clone(),
                parent: Some(parent),
                g: d as u32,
                h,
            });
            created.push(parent);
        }
        let new_leaf = created.pop()?;
        Some((new_leaf, created, result.moves))
    }

    /// Expands `id` and queues its children; returns the best inserted child.
    fn expand(&mut self, id: NodeId, record: TraceRecord) -> Option<NodeId> {
        let node = self.tree.node(id).clone();
        self.closed
            .entry(node.state.clone())
            .and_modify(|g| *g = (*g).min(node.g))
            .or_insert(node.g);
        self.stats.expansions += 1;
        let exp = parexand(self.task, self.graph, &node.state, self.config.fattening);
        let mut best: Option<(HeuristicValue, std::cmp::Reverse<usize>, NodeId)> = None;
        let mut inserted = 0;
        for child in exp.children {
            self.stats.generated += 1;
            if child.h.is_infinite() || self.is_closed(&child.state, node.g + 1) {
                continue;
            }
            let key_h = child.h;
            let width = child.actions.len();
            let cid = self.tree.add(SearchNode {
                state: child.state,
                incoming: child.actions,
                parent: Some(id),
                g: node.g + 1,
                h: child.h,
            });
            self.push_open(cid);
            inserted += 1;
            let key = (key_h, std::cmp::Reverse(width), cid);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        if self.config.trace {
            let name = |a: ActionId| self.task.action(a).name.clone();
            let mut record = record;
            record.expansion = self.stats.expansions;
            record.pivot = exp.pivot.map(name);
            record.fattened = exp.fattened.iter().map(|&a| name(a)).collect();
            record.children = inserted;
            self.trace.push(record);
        }
        best.map(|b| b.2)
    }

    fn record(
        &self,
        selection: Selection,
        selected: NodeId,
        parent_h: Option<HeuristicValue>,
        expanded: NodeId,
        moves: &[PushupMove],
    ) -> TraceRecord {
        let sel = self.tree.node(selected);
        let exp = self.tree.node(expanded);
        TraceRecord {
            expansion: 0,
            selection,
            selected,
            selected_h: sel.h.finite(),
            parent_h: parent_h.and_then(HeuristicValue::finite),
            pushup: moves
                .iter()
                .map(|m| TraceMove {
                    action: self.task.action(m.action).name.clone(),
                    from_depth: m.from_depth,
                    to_depth: m.to_depth,
                })
                .collect(),
            expanded,
            g: exp.g,
            h: exp.h.finite(),
            state_size: exp.state.len(),
            pivot: None,
            fattened: Vec::new(),
            children: 0,
        }
    }

    /// Compresses the solution branch once more before reading off the plan.
    /// Moving independent actions between sets leaves the leaf state
    /// unchanged, so the compressed leaf still satisfies the goal test.
    fn solved(mut self, leaf: NodeId) -> SearchResult {
        let mut leaf = leaf;
        if self.config.pushup != PushupMode::Off && self.tree.node(leaf).parent.is_some() {
            if let Some((new_leaf, _, moves)) = self.pushup(leaf) {
                if self.task.satisfied_by_init(&self.tree.node(new_leaf).state) {
                    self.stats.pushups += 1;
                    self.stats.pushup_moves += moves.len() as u64;
                    leaf = new_leaf;
                }
            }
        }
        let plan = self.tree.plan_from(leaf);
        self.finish(Outcome::Solved(plan))
    }

    fn finish(mut self, outcome: Outcome) -> SearchResult {
        self.stats.elapsed = self.start.elapsed();
        SearchResult {
            outcome,
            stats: self.stats,
            trace: self.trace,
        }
    }

    fn run(mut self) -> SearchResult {
        let goal = self.task.goal.clone();
        let h0 = h_adjsum2m(self.graph, &goal);
        if h0.is_infinite() {
            return self.finish(Outcome::Exhausted);
        }
        let root = self.tree.add(SearchNode {
            state: goal,
            incoming: Vec::new(),
            parent: None,
            g: 0,
            h: h0,
        });
        let mut next: Option<(NodeId, Selection, Option<HeuristicValue>)> = Some((root, Selection::Root, None));
        loop {
            if let Some(kind) = self.out_of_budget() {
                return self.finish(Outcome::Budget(kind));
            }
            let (selected, selection, parent_h) = match next.take() {
                Some(n) => n,
                None => match self.pop_open() {
                    Some(id) => (id, Selection::BestFirst, None),
                    None => return self.finish(Outcome::Exhausted),
                },
            };
            if self.task.satisfied_by_init(&self.tree.node(selected).state) {
                return self.solved(selected);
            }
            let mut target = selected;
            let mut moves = Vec::new();
            let mut interior = Vec::new();
            if self.config.pushup != PushupMode::Off && self.tree.node(selected).parent.is_some() {
                if let Some((leaf, created, m)) = self.pushup(selected) {
                    let n = self.tree.node(leaf);
                    if !self.is_closed(&n.state, n.g) {
                        self.stats.pushups += 1;
                        self.stats.pushup_moves += m.len() as u64;
                        // The original node stays available as an alternative.
                        self.push_open(selected);
                        target = leaf;
                        moves = m;
                        interior = created;
                    }
                }
            }
            if self.task.satisfied_by_init(&self.tree.node(target).state) {
                return self.solved(target);
            }
            if self.config.pushup == PushupMode::Aggressive {
                for &id in &interior {
                    if let Some(kind) = self.out_of_budget() {
                        return self.finish(Outcome::Budget(kind));
                    }
                    let n = self.tree.node(id);
                    if self.is_closed(&n.state, n.g) {
                        continue;
                    }
                    let rec = self.record(Selection::PushupBranch, id, None, id, &[]);
                    self.expand(id, rec);
                }
            }
            let rec = self.record(selection, selected, parent_h, target, &moves);
            let target_h = self.tree.node(target).h;
            if let Some(best) = self.expand(target, rec) {
                if self.tree.node(best).h < target_h {
                    next = Some((best, Selection::Greedy, Some(target_h)));
                }
            }
        }
    }
}

/// Runs the search on a prebuilt graph.
pub fn search(task: &Task, graph: &PlanningGraph, config: &SearchConfig) -> SearchResult {
    Searcher {
        task,
        graph,
        config,
        tree: SearchTree::default(),
        open: BinaryHeap::new(),
        closed: HashMap::new(),
        stats: SearchStats::default(),
        trace: Vec::new(),
        start: Instant::now(),
    }
    .run()
}

/// Builds the graph requested by `config` and searches. Unreachable goals
/// yield `Outcome::Exhausted` without searching.
pub fn plan(task: &Task, config: &SearchConfig) -> SearchResult {
    let start = Instant::now();
    match build_graph(task, config.graph_mode, config.stop) {
        Ok(graph) => {
            let mut r = search(task, &graph, config);
            r.stats.elapsed = start.elapsed();
            r
        }
        Err(e) => {
            log::info!("{e}");
            SearchResult {
                outcome: Outcome::Exhausted,
                stats: SearchStats {
                    elapsed: start.elapsed(),
                    ..SearchStats::default()
                },
                trace: Vec::new(),
            }
        }
    }
}
