//! Grounded STRIPS tasks: dense proposition and action ids.

use std::collections::HashMap;
use std::fmt;

use crate::pddl::Proposition;

pub type PropId = u32;
pub type ActionId = u32;

/// A fully instantiated STRIPS action. `pre`, `add` and `del` are sorted and
/// deduplicated, and `add ∩ del = ∅`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub id: ActionId,
    pub name: String,
    pub pre: Vec<PropId>,
    pub add: Vec<PropId>,
    pub del: Vec<PropId>,
}

impl GroundAction {
    pub fn adds(&self, p: PropId) -> bool {
        self.add.binary_search(&p).is_ok()
    }

    pub fn deletes(&self, p: PropId) -> bool {
        self.del.binary_search(&p).is_ok()
    }

    pub fn requires(&self, p: PropId) -> bool {
        self.pre.binary_search(&p).is_ok()
    }
}

#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<String>,
    pub props: Vec<Proposition>,
    pub init: Vec<PropId>,
    pub goal: Vec<PropId>,
    pub actions: Vec<GroundAction>,
    prop_index: HashMap<Proposition, PropId>,
    action_index: HashMap<String, ActionId>,
    init_mask: Vec<bool>,
    achievers: Vec<Vec<ActionId>>,
}

fn normalize(v: &mut Vec<PropId>) {
    v.sort_unstable();
    v.dedup();
}

impl Task {
    /// Assembles a task from already-numbered parts. Action ids are reassigned
    /// densely in the given order; set fields are sorted and `add ∩ del` is
    /// removed from `del`.
    pub fn new(
        name: impl Into<String>,
        domain_name: impl Into<String>,
        objects: Vec<String>,
        props: Vec<Proposition>,
        mut init: Vec<PropId>,
        mut goal: Vec<PropId>,
        mut actions: Vec<GroundAction>,
    ) -> Task {
        normalize(&mut init);
        normalize(&mut goal);
        for (i, a) in actions.iter_mut().enumerate() {
            a.id = i as ActionId;
            normalize(&mut a.pre);
            normalize(&mut a.add);
            normalize(&mut a.del);
            let add = a.add.clone();
            a.del.retain(|p| add.binary_search(p).is_err());
        }
        let prop_index = props
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as PropId))
            .collect();
        let action_index = actions.iter().map(|a| (a.name.clone(), a.id)).collect();
        let mut init_mask = vec![false; props.len()];
        for &p in &init {
            init_mask[p as usize] = true;
        }
        let mut achievers = vec![Vec::new(); props.len()];
        for a in &actions {
            for &p in &a.add {
                achievers[p as usize].push(a.id);
            }
        }
        Task {
            name: name.into(),
            domain_name: domain_name.into(),
            objects,
            props,
            init,
            goal,
            actions,
            prop_index,
            action_index,
            init_mask,
            achievers,
        }
    }

    /// Actions adding `p`, in id order.
    pub fn achievers(&self, p: PropId) -> &[ActionId] {
        &self.achievers[p as usize]
    }

    pub fn num_props(&self) -> usize {
        self.props.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id as usize]
    }

    pub fn prop_id(&self, p: &Proposition) -> Option<PropId> {
        self.prop_index.get(p).copied()
    }

    /// Looks up a proposition written as `(pred a b)`.
    pub fn prop_by_str(&self, s: &str) -> Option<PropId> {
        let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
        let mut parts = inner.split_whitespace().map(str::to_lowercase);
        let predicate = parts.next()?;
        self.prop_id(&Proposition {
            predicate,
            args: parts.collect(),
        })
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    pub fn in_init(&self, p: PropId) -> bool {
        self.init_mask[p as usize]
    }

    /// Goal test of the regression search: every subgoal holds initially.
    pub fn satisfied_by_init(&self, state: &[PropId]) -> bool {
        state.iter().all(|&p| self.in_init(p))
    }

    pub fn prop_name(&self, p: PropId) -> String {
        self.props[p as usize].to_string()
    }

    /// Summary of the grounding, one line per schema plus totals.
    pub fn grounding_report(&self) -> String {
        let mut per_schema: Vec<(String, usize)> = Vec::new();
        for a in &self.actions {
            let schema = a.name.split('(').next().unwrap_or("").to_string();
            match per_schema.iter_mut().find(|(s, _)| *s == schema) {
                Some((_, n)) => *n += 1,
                None => per_schema.push((schema, 1)),
            }
        }
        let mut out = format!(
            "task {} (domain {}): {} objects, {} propositions, {} ground actions\n",
            self.name,
            self.domain_name,
            self.objects.len(),
            self.props.len(),
            self.actions.len()
        );
        for (s, n) in per_schema {
            out.push_str(&format!("  {s}: {n}\n"));
        }
        out
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Convenience constructor for hand-built tasks (tests, generators).
///
/// Propositions are nullary atoms named by the given strings.
#[derive(Debug, Default)]
pub struct TaskBuilder {
    props: Vec<Proposition>,
    index: HashMap<String, PropId>,
    init: Vec<PropId>,
    goal: Vec<PropId>,
    actions: Vec<GroundAction>,
}

impl TaskBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn prop(&mut self, name: &str) -> PropId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.props.len() as PropId;
        self.props.push(Proposition {
            predicate: name.to_lowercase(),
            args: Vec::new(),
        });
        self.index.insert(name.to_string(), id);
        id
    }

    fn ids(&mut self, names: &[&str]) -> Vec<PropId> {
        names.iter().map(|n| self.prop(n)).collect()
    }

    pub fn init(mut self, names: &[&str]) -> Self {
        let ids = self.ids(names);
        self.init.extend(ids);
        self
    }

    pub fn goal(mut self, names: &[&str]) -> Self {
        let ids = self.ids(names);
        self.goal.extend(ids);
        self
    }

    pub fn action(mut self, name: &str, pre: &[&str], add: &[&str], del: &[&str]) -> Self {
        let pre = self.ids(pre);
        let add = self.ids(add);
        let del = self.ids(del);
        self.actions.push(GroundAction {
            id: 0,
            name: format!("{}()", name.to_lowercase()),
            pre,
            add,
            del,
        });
        self
    }

    pub fn build(self, name: &str) -> Task {
        Task::new(
            name,
            "handmade",
            Vec::new(),
            self.props,
            self.init,
            self.goal,
            self.actions,
        )
    }
}
