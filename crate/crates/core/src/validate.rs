//! Independent plan checker.
//!
//! Progression and the interference test are implemented here from scratch
//! rather than shared with the planner, so a bug in one does not hide in the
//! other.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::plan::ParallelPlan;
use crate::task::{ActionId, GroundAction, Task};

/// Random within-step orders replayed per step.
pub const LINEARIZATIONS: usize = 3;
const SEED: u64 = 0x005e_ed0f_9a7a_11e1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    PreconditionUnsatisfied,
    StepNotIndependent,
    GoalUnachieved,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::PreconditionUnsatisfied => "precondition-unsatisfied",
            FailureReason::StepNotIndependent => "step-not-independent",
            FailureReason::GoalUnachieved => "goal-unachieved",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// 1-based step, or the makespan for an unachieved goal.
    pub step: usize,
    pub reason: FailureReason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub makespan: usize,
    pub action_count: usize,
    pub failures: Vec<Failure>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            write!(
                f,
                "valid plan: makespan {} with {} actions",
                self.makespan, self.action_count
            )
        } else {
            writeln!(f, "invalid plan:")?;
            for fl in &self.failures {
                writeln!(f, "  step {}: {}: {}", fl.step, fl.reason, fl.detail)?;
            }
            Ok(())
        }
    }
}

fn touches(effects_of: &GroundAction, set: &[u32]) -> bool {
    set.iter()
        .any(|p| effects_of.add.contains(p) || effects_of.del.contains(p))
}

fn interfere(x: &GroundAction, y: &GroundAction) -> bool {
    touches(x, &y.pre) || touches(y, &x.pre) || touches(x, &y.add) || touches(x, &y.del)
}

fn apply(state: &mut [bool], a: &GroundAction) {
    for &p in &a.del {
        state[p as usize] = false;
    }
    for &p in &a.add {
        state[p as usize] = true;
    }
}

fn missing(state: &[bool], a: &GroundAction, task: &Task) -> Vec<String> {
    a.pre
        .iter()
        .filter(|&&p| !state[p as usize])
        .map(|&p| task.prop_name(p))
        .collect()
}

/// Checks `plan` step by step from the initial state.
pub fn validate(task: &Task, plan: &ParallelPlan) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut state = vec![false; task.num_props()];
    for &p in &task.init {
        state[p as usize] = true;
    }
    let mut failures = Vec::new();
    for (idx, step) in plan.steps.iter().enumerate() {
        let number = idx + 1;
        let acts: Vec<&GroundAction> = step.iter().map(|&a| task.action(a)).collect();
        for (i, x) in acts.iter().enumerate() {
            for y in &acts[i + 1..] {
                if x.id == y.id {
                    failures.push(Failure {
                        step: number,
                        reason: FailureReason::StepNotIndependent,
                        detail: format!("{} appears twice", x.name),
                    });
                } else if interfere(x, y) {
                    failures.push(Failure {
                        step: number,
                        reason: FailureReason::StepNotIndependent,
                        detail: format!("{} interferes with {}", x.name, y.name),
                    });
                }
            }
        }
        for a in &acts {
            let m = missing(&state, a, task);
            if !m.is_empty() {
                failures.push(Failure {
                    step: number,
                    reason: FailureReason::PreconditionUnsatisfied,
                    detail: format!("{} needs {}", a.name, m.join(" ")),
                });
            }
        }
        let mut simultaneous = state.clone();
        for a in &acts {
            for &p in &a.del {
                simultaneous[p as usize] = false;
            }
        }
        for a in &acts {
            for &p in &a.add {
                simultaneous[p as usize] = true;
            }
        }
        let mut order: Vec<ActionId> = step.clone();
        for _ in 0..LINEARIZATIONS {
            order.shuffle(&mut rng);
            let mut s = state.clone();
            let mut diverged = None;
            for &a in &order {
                let act = task.action(a);
                if !missing(&s, act, task).is_empty() {
                    diverged = Some(format!("{} not applicable in order", act.name));
                    break;
                }
                apply(&mut s, act);
            }
            if diverged.is_none() && s != simultaneous {
                diverged = Some("linearizations reach different states".to_string());
            }
            if let Some(detail) = diverged {
                let names: Vec<&str> = order.iter().map(|&a| task.action(a).name.as_str()).collect();
                failures.push(Failure {
                    step: number,
                    reason: FailureReason::StepNotIndependent,
                    detail: format!("{detail}: {}", names.join(", ")),
                });
                break;
            }
        }
        state = simultaneous;
    }
    let unmet: Vec<String> = task
        .goal
        .iter()
        .filter(|&&g| !state[g as usize])
        .map(|&g| task.prop_name(g))
        .collect();
    if !unmet.is_empty() {
        failures.push(Failure {
            step: plan.makespan(),
            reason: FailureReason::GoalUnachieved,
            detail: unmet.join(" "),
        });
    }
    ValidationReport {
        valid: failures.is_empty(),
        makespan: plan.makespan(),
        action_count: plan.action_count(),
        failures,
    }
}
