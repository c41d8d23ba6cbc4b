use std::fmt;

/// A name with an optional declared type; `None` means the root type `object`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

/// A positive literal inside an action schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiteralTemplate {
    pub predicate: String,
    pub args: Vec<Term>,
}

/// A ground atom `(predicate arg ...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proposition {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub preconditions: Vec<LiteralTemplate>,
    pub add_effects: Vec<LiteralTemplate>,
    pub del_effects: Vec<LiteralTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent type (`None` for direct subtypes of `object`).
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Proposition>,
    pub goal: Vec<Proposition>,
}

impl Domain {
    pub fn typed(&self) -> bool {
        self.requirements.iter().any(|r| r == ":typing")
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// True when `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: Option<&str>, ancestor: Option<&str>) -> bool {
        let Some(ancestor) = ancestor.filter(|a| *a != "object") else {
            return true;
        };
        let mut cur = ty;
        // Bounded walk guards against cyclic type declarations.
        for _ in 0..=self.types.len() {
            match cur {
                None => return false,
                Some(t) if t == ancestor => return true,
                Some(t) => {
                    cur = self.types.iter().find(|d| d.name == t).and_then(|d| d.ty.as_deref());
                }
            }
        }
        false
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

impl fmt::Display for LiteralTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

fn write_typed_list(f: &mut fmt::Formatter<'_>, items: &[TypedName], var: bool) -> fmt::Result {
    let prefix = if var { "?" } else { "" };
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{prefix}{}", item.name)?;
        if let Some(ty) = &item.ty {
            write!(f, " - {ty}")?;
        }
    }
    Ok(())
}

fn write_conjunction<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    f.write_str("(and")?;
    for i in items {
        write!(f, " {i}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            f.write_str("  (:types ")?;
            write_typed_list(f, &self.types, false)?;
            f.write_str(")\n")?;
        }
        if !self.constants.is_empty() {
            f.write_str("  (:constants ")?;
            write_typed_list(f, &self.constants, false)?;
            f.write_str(")\n")?;
        }
        f.write_str("  (:predicates")?;
        for p in &self.predicates {
            write!(f, " ({}", p.name)?;
            if !p.params.is_empty() {
                f.write_str(" ")?;
                write_typed_list(f, &p.params, true)?;
            }
            f.write_str(")")?;
        }
        f.write_str(")\n")?;
        for a in &self.actions {
            writeln!(f, "  (:action {}", a.name)?;
            f.write_str("    :parameters (")?;
            write_typed_list(f, &a.parameters, true)?;
            f.write_str(")\n    :precondition ")?;
            write_conjunction(f, &a.preconditions)?;
            f.write_str("\n    :effect (and")?;
            for e in &a.add_effects {
                write!(f, " {e}")?;
            }
            for e in &a.del_effects {
                write!(f, " (not {e})")?;
            }
            f.write_str("))\n")?;
        }
        f.write_str(")\n")
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain)?;
        f.write_str("  (:objects ")?;
        write_typed_list(f, &self.objects, false)?;
        f.write_str(")\n  (:init")?;
        for p in &self.init {
            write!(f, "\n    {p}")?;
        }
        f.write_str(")\n  (:goal ")?;
        write_conjunction(f, &self.goal)?;
        f.write_str("))\n")
    }
}
