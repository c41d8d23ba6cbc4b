//! Parallel plans and their text format.
//!
//! ```text
//! ;; makespan=2 actions=3
//! 1: flipa() | flipb()
//! 2: go(l1,l2)
//! ```
//!
//! Steps are numbered from 1; actions inside a step are sorted by name.

use thiserror::Error;

use crate::task::{ActionId, Task};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelPlan {
    pub steps: Vec<Vec<ActionId>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown action `{name}`")]
    UnknownAction { line: usize, name: String },
}

impl ParallelPlan {
    pub fn new(steps: Vec<Vec<ActionId>>) -> Self {
        ParallelPlan { steps }
    }

    /// Each action in its own step.
    pub fn sequential(actions: &[ActionId]) -> Self {
        ParallelPlan {
            steps: actions.iter().map(|&a| vec![a]).collect(),
        }
    }

    pub fn makespan(&self) -> usize {
        self.steps.len()
    }

    pub fn action_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    /// Actions step by step; order within a step is by name.
    pub fn linearize(&self, task: &Task) -> Vec<ActionId> {
        self.steps
            .iter()
            .flat_map(|s| {
                let mut s = s.clone();
                s.sort_by(|&a, &b| task.action(a).name.cmp(&task.action(b).name));
                s
            })
            .collect()
    }

    pub fn to_text(&self, task: &Task) -> String {
        let mut out = format!(";; makespan={} actions={}\n", self.makespan(), self.action_count());
        for (i, step) in self.steps.iter().enumerate() {
            let mut names: Vec<&str> = step.iter().map(|&a| task.action(a).name.as_str()).collect();
            names.sort_unstable();
            out.push_str(&format!("{}: {}\n", i + 1, names.join(" | ")));
        }
        out
    }

    /// Parses the step format. Lines starting with `;` are comments; the
    /// header counts, when present, must match the steps.
    pub fn parse(task: &Task, text: &str) -> Result<Self, PlanParseError> {
        let mut steps = Vec::new();
        let mut header: Option<(usize, usize, usize)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if let Some(comment) = trimmed.strip_prefix(";;") {
                if let Some(h) = parse_header(comment) {
                    header = Some((h.0, h.1, line));
                }
                continue;
            }
            if trimmed.is_empty() || trimmed.starts_with(';') {
                continue;
            }
            let malformed = |message: &str| PlanParseError::Malformed {
                line,
                message: message.to_string(),
            };
            let (num, rest) = trimmed
                .split_once(':')
                .ok_or_else(|| malformed("expected `<step>: <actions>`"))?;
            let n: usize = num
                .trim()
                .parse()
                .map_err(|_| malformed("step number is not an integer"))?;
            if n != steps.len() + 1 {
                return Err(malformed(&format!("expected step {}, found {n}", steps.len() + 1)));
            }
            let mut step = Vec::new();
            for name in rest.split('|').map(str::trim).filter(|s| !s.is_empty()) {
                let norm = normalize_action_name(name);
                let id = task
                    .action_by_name(&norm)
                    .ok_or_else(|| PlanParseError::UnknownAction {
                        line,
                        name: name.to_string(),
                    })?;
                step.push(id);
            }
            steps.push(step);
        }
        let plan = ParallelPlan { steps };
        if let Some((k, n, line)) = header {
            if k != plan.makespan() || n != plan.action_count() {
                return Err(PlanParseError::Malformed {
                    line,
                    message: format!(
                        "header says makespan={k} actions={n}, plan has makespan={} actions={}",
                        plan.makespan(),
                        plan.action_count()
                    ),
                });
            }
        }
        Ok(plan)
    }
}

fn parse_header(comment: &str) -> Option<(usize, usize)> {
    let mut makespan = None;
    let mut actions = None;
    for field in comment.split_whitespace() {
        if let Some(v) = field.strip_prefix("makespan=") {
            makespan = v.parse().ok();
        } else if let Some(v) = field.strip_prefix("actions=") {
            actions = v.parse().ok();
        }
    }
    Some((makespan?, actions?))
}

/// Accepts `(pick b1 rooma left)` as well as `pick(b1,rooma,left)`.
fn normalize_action_name(name: &str) -> String {
    let lower = name.to_lowercase();
    if let Some(inner) = lower.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        let mut parts = inner.split_whitespace();
        let head = parts.next().unwrap_or("");
        let args: Vec<&str> = parts.collect();
        return format!("{head}({})", args.join(","));
    }
    lower.chars().filter(|c| !c.is_whitespace()).collect()
}
