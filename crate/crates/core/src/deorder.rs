//! Minimal de-ordering of sequential plans and ASAP scheduling into steps.

use thiserror::Error;

use crate::plan::ParallelPlan;
use crate::regression::independent;
use crate::task::{ActionId, Task};
use crate::validate::{validate, ValidationReport};

/// A plan as a partial order: `edges` hold `(i, j)` with `i < j`, indices into `actions`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedPlan {
    pub actions: Vec<ActionId>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeorderError {
    #[error("input plan is not valid: {0}")]
    InvalidPlan(Box<ValidationReport>),
    #[error("ordering constraints contain a cycle")]
    Cycle,
}

/// Keeps only the orderings the plan needs: `a_i` before `a_j` when `a_j`
/// consumes a proposition whose last producer before it is `a_i`, or when
/// the two actions interfere.
pub fn deorder(task: &Task, sequence: &[ActionId]) -> Result<OrderedPlan, DeorderError> {
    let report = validate(task, &ParallelPlan::sequential(sequence));
    if !report.valid {
        return Err(DeorderError::InvalidPlan(Box::new(report)));
    }
    let mut edges = Vec::new();
    for j in 0..sequence.len() {
        let aj = task.action(sequence[j]);
        for i in 0..j {
            let ai = task.action(sequence[i]);
            let supplies = aj
                .pre
                .iter()
                .any(|&p| ai.adds(p) && !sequence[i + 1..j].iter().any(|&k| task.action(k).adds(p)));
            if supplies || !independent(ai, aj) {
                edges.push((i, j));
            }
        }
    }
    Ok(OrderedPlan {
        actions: sequence.to_vec(),
        edges,
    })
}

/// ASAP schedule: each action goes one step after its latest predecessor.
pub fn schedule(plan: &OrderedPlan) -> Result<ParallelPlan, DeorderError> {
    let n = plan.actions.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &plan.edges {
        preds[j].push(i);
        succs[i].push(j);
        indegree[j] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut step = vec![0usize; n];
    let mut done = 0;
    while let Some(i) = ready.pop() {
        done += 1;
        step[i] = preds[i].iter().map(|&p| step[p] + 1).max().unwrap_or(0);
        for &j in &succs[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    if done < n {
        return Err(DeorderError::Cycle);
    }
    let makespan = step.iter().map(|&s| s + 1).max().unwrap_or(0);
    let mut steps = vec![Vec::new(); makespan];
    for i in 0..n {
        steps[step[i]].push(plan.actions[i]);
    }
    Ok(ParallelPlan::new(steps))
}

/// De-orders the linearization of `plan` and reschedules it.
pub fn reschedule(task: &Task, plan: &ParallelPlan) -> Result<ParallelPlan, DeorderError> {
    schedule(&deorder(task, &plan.linearize(task))?)
}
