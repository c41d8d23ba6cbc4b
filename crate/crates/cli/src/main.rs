//! `parplan`: plan, validate, de-order and benchmark from the command line.
//!
//! Exit codes: 0 success, 1 no plan / invalid plan, 2 unreadable or
//! malformed input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use parplan::bench::{self, RunRecord};
use parplan::deorder::{deorder, schedule, DeorderError};
use parplan::graph::{GraphMode, StopCondition};
use parplan::plan::ParallelPlan;
use parplan::search::{self, Outcome, PushupMode, SearchConfig};
use parplan::task::Task;
use parplan::validate::validate;
use parplan::{pddl, suites};

#[derive(Parser, Debug)]
#[command(name = "parplan", version, about = "Parallel regression planner for STRIPS PDDL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a problem and print the plan.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the plan here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a plan file against a problem.
    Validate {
        domain: PathBuf,
        problem: PathBuf,
        plan: PathBuf,
    },
    /// Remove unneeded orderings from a plan and reschedule it into steps.
    Deorder {
        domain: PathBuf,
        problem: PathBuf,
        plan: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run every row of a manifest and emit CSV.
    Bench {
        manifest: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write each solved plan into this directory.
        #[arg(long)]
        plans: Option<PathBuf>,
        /// Worker threads (default: available cores).
        #[arg(short, long)]
        jobs: Option<usize>,
    },
    /// Write the bundled benchmark PDDL files and manifests.
    Generate { dir: PathBuf },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum GraphArg {
    Parallel,
    Serial,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PushupArg {
    Off,
    On,
    Aggressive,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StopArg {
    Goals,
    Leveloff,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    #[arg(long, value_enum, default_value = "parallel")]
    graph: GraphArg,
    #[arg(long, value_enum, default_value = "on")]
    fatten: Switch,
    #[arg(long, value_enum, default_value = "on")]
    pushup: PushupArg,
    #[arg(long, default_value_t = 5.0)]
    weight: f64,
    #[arg(long, value_enum, default_value = "goals")]
    stop: StopArg,
    /// Maximum node expansions.
    #[arg(long, env = "PARPLAN_NODE_BUDGET", default_value_t = 1_000_000)]
    node_budget: u64,
    /// Wall-clock budget in seconds.
    #[arg(long, env = "PARPLAN_TIME_BUDGET", default_value_t = 300.0)]
    time_budget: f64,
    /// Emit one JSON record per expansion on stderr.
    #[arg(long)]
    trace: bool,
}

impl ConfigArgs {
    fn to_config(&self) -> SearchConfig {
        SearchConfig {
            weight: self.weight,
            fattening: matches!(self.fatten, Switch::On),
            pushup: match self.pushup {
                PushupArg::Off => PushupMode::Off,
                PushupArg::On => PushupMode::On,
                PushupArg::Aggressive => PushupMode::Aggressive,
            },
            graph_mode: match self.graph {
                GraphArg::Parallel => GraphMode::Parallel,
                GraphArg::Serial => GraphMode::Serial,
            },
            stop: match self.stop {
                StopArg::Goals => StopCondition::GoalsNonMutex,
                StopArg::Leveloff => StopCondition::LevelOff,
            },
            node_budget: self.node_budget,
            time_budget: Duration::from_secs_f64(self.time_budget.max(0.0)),
            trace: self.trace,
        }
    }
}

/// Flags of one manifest row, parsed with the same grammar as `plan`.
#[derive(Parser, Debug)]
#[command(no_binary_name = true)]
struct RowFlags {
    #[command(flatten)]
    config: ConfigArgs,
}

/// Input failures map to exit code 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

fn input<T, E: Into<anyhow::Error>>(r: std::result::Result<T, E>, what: &str) -> std::result::Result<T, InputError> {
    r.map_err(|e| InputError(e.into().context(what.to_string())))
}

fn read(path: &Path) -> std::result::Result<String, InputError> {
    input(std::fs::read_to_string(path), &format!("reading {}", path.display()))
}

fn load(domain: &Path, problem: &Path) -> std::result::Result<Task, InputError> {
    let d = read(domain)?;
    let p = read(problem)?;
    input(pddl::load_task(&d, &p), "pddl")
}

fn load_plan(task: &Task, path: &Path) -> std::result::Result<ParallelPlan, InputError> {
    let text = read(path)?;
    input(
        ParallelPlan::parse(task, &text),
        &format!("plan file {}", path.display()),
    )
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn cmd_plan(domain: &Path, problem: &Path, args: &ConfigArgs, output: Option<&Path>) -> Result<ExitCode> {
    let task = match load(domain, problem) {
        Ok(t) => t,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(2));
        }
    };
    log::info!("{}", task.grounding_report().trim_end());
    let config = args.to_config();
    let result = search::plan(&task, &config);
    if config.trace {
        let mut err = std::io::stderr().lock();
        for r in &result.trace {
            writeln!(err, "{}", serde_json::to_string(r)?)?;
        }
    }
    let stats = &result.stats;
    match &result.outcome {
        Outcome::Solved(plan) => {
            let report = validate(&task, plan);
            if !report.valid {
                eprintln!("error: validate: search produced an invalid plan\n{report}");
                return Ok(ExitCode::from(1));
            }
            emit(output, &plan.to_text(&task))?;
            eprintln!(
                "solved {}: makespan {} actions {} expansions {} time {:.3}s",
                task.name,
                plan.makespan(),
                plan.action_count(),
                stats.expansions,
                stats.elapsed.as_secs_f64()
            );
            Ok(ExitCode::SUCCESS)
        }
        other => {
            eprintln!(
                "error: search: no plan for {} ({other}) after {} expansions, {:.3}s",
                task.name,
                stats.expansions,
                stats.elapsed.as_secs_f64()
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_validate(domain: &Path, problem: &Path, plan: &Path) -> Result<ExitCode> {
    let loaded = load(domain, problem).and_then(|t| load_plan(&t, plan).map(|p| (t, p)));
    let (task, plan) = match loaded {
        Ok(x) => x,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(2));
        }
    };
    let report = validate(&task, &plan);
    println!("{}", report.to_string().trim_end());
    Ok(if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_deorder(domain: &Path, problem: &Path, plan: &Path, output: Option<&Path>) -> Result<ExitCode> {
    let loaded = load(domain, problem).and_then(|t| load_plan(&t, plan).map(|p| (t, p)));
    let (task, plan) = match loaded {
        Ok(x) => x,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(2));
        }
    };
    let ordered = match deorder(&task, &plan.linearize(&task)) {
        Ok(o) => o,
        Err(DeorderError::InvalidPlan(report)) => {
            eprintln!(
                "error: deorder: input plan is not valid\n{}",
                report.to_string().trim_end()
            );
            return Ok(ExitCode::from(1));
        }
        Err(e) => {
            eprintln!("error: deorder: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let parallel = schedule(&ordered)?;
    let report = validate(&task, &parallel);
    if !report.valid {
        eprintln!("error: deorder: rescheduled plan is not valid\n{report}");
        return Ok(ExitCode::from(1));
    }
    emit(output, &parallel.to_text(&task))?;
    eprintln!(
        "deordered {}: makespan {} -> {} ({} orderings kept)",
        task.name,
        plan.makespan(),
        parallel.makespan(),
        ordered.edges.len()
    );
    Ok(ExitCode::SUCCESS)
}

struct Row {
    domain: PathBuf,
    problem: PathBuf,
    flags: Vec<String>,
}

fn parse_manifest(path: &Path) -> Result<Vec<Row>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        anyhow::ensure!(
            fields.len() >= 2,
            "{}:{}: expected `<domain> <problem> [flags]`",
            path.display(),
            i + 1
        );
        rows.push(Row {
            domain: base.join(fields[0]),
            problem: base.join(fields[1]),
            flags: fields[2..].iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(rows)
}

fn run_row(row: &Row) -> (RunRecord, Option<(Task, ParallelPlan)>) {
    let label = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let config = match RowFlags::try_parse_from(&row.flags) {
        Ok(f) => f.config.to_config(),
        Err(e) => {
            log::warn!("{}: bad flags: {e}", row.problem.display());
            let mut r = bench::run_texts(
                &label(&row.domain),
                &label(&row.problem),
                "(",
                "(",
                &SearchConfig::default(),
            );
            r.record.config = row.flags.join(" ");
            return (r.record, None);
        }
    };
    match load(&row.domain, &row.problem) {
        Ok(task) => {
            let run = bench::run_task(&task, &config);
            let plan = run.plan.map(|p| (task, p));
            (run.record, plan)
        }
        Err(InputError(e)) => {
            log::warn!("{e:#}");
            let r = bench::run_texts(&label(&row.domain), &label(&row.problem), "(", "(", &config);
            (r.record, None)
        }
    }
}

fn cmd_bench(manifest: &Path, output: Option<&Path>, plans: Option<&Path>, jobs: Option<usize>) -> Result<ExitCode> {
    let rows = parse_manifest(manifest)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build()?;
    let results: Vec<(RunRecord, Option<(Task, ParallelPlan)>)> =
        pool.install(|| rows.par_iter().map(run_row).collect());
    if let Some(dir) = plans {
        std::fs::create_dir_all(dir)?;
        for (i, (record, solved)) in results.iter().enumerate() {
            if let Some((task, plan)) = solved {
                let name = format!("{:04}-{}.plan", i + 1, record.problem);
                std::fs::write(dir.join(name), plan.to_text(task))?;
            }
        }
    }
    let records: Vec<RunRecord> = results.into_iter().map(|(r, _)| r).collect();
    let mut buf = Vec::new();
    bench::write_csv(&mut buf, &records)?;
    emit(output, std::str::from_utf8(&buf)?)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan {
            domain,
            problem,
            config,
            output,
        } => cmd_plan(domain, problem, config, output.as_deref()),
        Command::Validate { domain, problem, plan } => cmd_validate(domain, problem, plan),
        Command::Deorder {
            domain,
            problem,
            plan,
            output,
        } => cmd_deorder(domain, problem, plan, output.as_deref()),
        Command::Bench {
            manifest,
            output,
            plans,
            jobs,
        } => cmd_bench(manifest, output.as_deref(), plans.as_deref(), *jobs),
        Command::Generate { dir } => suites::write_all(dir)
            .with_context(|| format!("writing benchmarks to {}", dir.display()))
            .map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
