//! Parallel regression planning for STRIPS tasks.
//!
//! A task is grounded from PDDL, a planning graph supplies set-level
//! heuristics, and a hybrid greedy/weighted-A* regression search builds
//! parallel plans directly. Plans can be checked with [`validate::validate`]
//! and post-processed with [`deorder`].
//!
//! ```
//! use parplan::{pddl, search, suites, validate};
//!
//! let task = pddl::load_task(suites::TWO_SWITCH_DOMAIN, suites::TWO_SWITCH_PROBLEM).unwrap();
//! let result = search::plan(&task, &search::SearchConfig::default());
//! let plan = result.outcome.plan().unwrap();
//! assert_eq!(plan.makespan(), 1);
//! assert!(validate::validate(&task, plan).valid);
//! ```

pub mod bench;
pub mod deorder;
pub mod expand;
pub mod graph;
pub mod heuristics;
pub mod pddl;
pub mod plan;
pub mod pushup;
pub mod regression;
pub mod search;
pub mod suites;
pub mod task;
pub mod validate;

pub use graph::{build_graph, GraphMode, LevelValue, PlanningGraph, StopCondition};
pub use heuristics::HeuristicValue;
pub use plan::ParallelPlan;
pub use search::{Outcome, PushupMode, SearchConfig};
pub use task::{ActionId, PropId, Task};
