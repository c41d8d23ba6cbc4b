//! Benchmark runs and their CSV rows.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::pddl::load_task;
use crate::plan::ParallelPlan;
use crate::search::{plan, Outcome, SearchConfig};
use crate::task::Task;
use crate::validate::validate;

/// One CSV row. Column order is the output contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub domain: String,
    pub problem: String,
    pub config: String,
    pub outcome: String,
    pub makespan: Option<usize>,
    pub actions: Option<usize>,
    pub expansions: u64,
    #[serde(serialize_with = "three_decimals")]
    pub time_s: f64,
}

fn three_decimals<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:.3}"))
}

#[derive(Debug, Clone)]
pub struct Run {
    pub record: RunRecord,
    pub plan: Option<ParallelPlan>,
}

/// Solves an already grounded task. A returned plan that fails validation
/// is logged as an error and the row reports `exhausted`.
pub fn run_task(task: &Task, config: &SearchConfig) -> Run {
    let start = Instant::now();
    let result = plan(task, config);
    let elapsed = start.elapsed().as_secs_f64();
    let mut outcome = result.outcome.label().to_string();
    let plan = match result.outcome {
        Outcome::Solved(p) => {
            let report = validate(task, &p);
            if report.valid {
                Some(p)
            } else {
                log::error!("{}: search returned an invalid plan\n{report}", task.name);
                outcome = Outcome::Exhausted.label().to_string();
                None
            }
        }
        _ => None,
    };
    Run {
        record: RunRecord {
            domain: task.domain_name.clone(),
            problem: task.name.clone(),
            config: config.fingerprint(),
            outcome,
            makespan: plan.as_ref().map(ParallelPlan::makespan),
            actions: plan.as_ref().map(ParallelPlan::action_count),
            expansions: result.stats.expansions,
            time_s: elapsed,
        },
        plan,
    }
}

/// Parses, grounds and solves. Input errors become an `invalid-input` row.
pub fn run_texts(domain_label: &str, problem_label: &str, domain: &str, problem: &str, config: &SearchConfig) -> Run {
    match load_task(domain, problem) {
        Ok(task) => run_task(&task, config),
        Err(e) => {
            log::warn!("{problem_label}: {e}");
            Run {
                record: RunRecord {
                    domain: domain_label.to_string(),
                    problem: problem_label.to_string(),
                    config: config.fingerprint(),
                    outcome: "invalid-input".to_string(),
                    makespan: None,
                    actions: None,
                    expansions: 0,
                    time_s: 0.0,
                },
                plan: None,
            }
        }
    }
}

pub fn run_files(domain: &Path, problem: &Path, config: &SearchConfig) -> Run {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    match (read(domain), read(problem)) {
        (Ok(d), Ok(p)) => run_texts(
            &domain.display().to_string(),
            &problem.display().to_string(),
            &d,
            &p,
            config,
        ),
        (Err(e), _) | (_, Err(e)) => {
            log::warn!("{e}");
            run_texts(
                &domain.display().to_string(),
                &problem.display().to_string(),
                "(",
                "(",
                config,
            )
        }
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "domain",
    "problem",
    "config",
    "outcome",
    "makespan",
    "actions",
    "expansions",
    "time_s",
];

/// Writes rows with a header; an empty slice still yields the header.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suites;

    #[test]
    fn csv_header_and_row() {
        let run = run_texts(
            "d",
            "p",
            suites::TWO_SWITCH_DOMAIN,
            suites::TWO_SWITCH_PROBLEM,
            &SearchConfig::default(),
        );
        assert_eq!(run.record.outcome, "solved");
        let mut buf = Vec::new();
        write_csv(&mut buf, &[run.record]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "domain,problem,config,outcome,makespan,actions,expansions,time_s"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("two-switch,two-switch,graph=parallel;fatten=on;pushup=on;w=5;stop=goals,solved,1,2,"));
    }

    #[test]
    fn empty_csv_has_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn bad_input_row() {
        let run = run_texts("d", "p", "(define", "", &SearchConfig::default());
        assert_eq!(run.record.outcome, "invalid-input");
        assert!(run.plan.is_none());
    }
}
