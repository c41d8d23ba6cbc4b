//! STRIPS-subset PDDL: reading domains and problems, printing them back, and
//! grounding them into a [`Task`](crate::task::Task).

mod ast;
mod ground;
mod parse;
mod sexpr;

pub use ast::{ActionSchema, Domain, LiteralTemplate, PredicateDecl, Problem, Proposition, Term, TypedName};
pub use ground::ground;
pub use parse::{parse_domain, parse_problem};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported requirement `{0}`")]
    UnsupportedRequirement(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(String),
    #[error("undeclared object `{0}`")]
    UndeclaredObject(String),
    #[error("undeclared type `{0}`")]
    UndeclaredType(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("predicate `{predicate}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("negated goal literal {0} is not supported")]
    NegatedGoal(String),
    #[error("problem is for domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },
}

/// Parses both files and grounds the result.
pub fn load_task(domain_text: &str, problem_text: &str) -> Result<crate::task::Task, PddlError> {
    let domain = parse_domain(domain_text)?;
    let problem = parse_problem(problem_text, &domain)?;
    Ok(ground(&domain, &problem))
}
