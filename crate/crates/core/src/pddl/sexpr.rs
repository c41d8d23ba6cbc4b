//! A small s-expression reader for PDDL text.
//!
//! Identifiers are lower-cased on read since PDDL is case-insensitive.
//! Comments run from `;` to the end of the line.

use super::PddlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// The leading atom of a list, e.g. `and` for `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(SExpr::as_atom)
    }
}

pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<SExpr, PddlError> {
        self.skip_trivia();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Err(syntax(start, "unexpected end of input")),
            Some(')') => Err(syntax(start, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(syntax(start, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items, start));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.extend(c.to_lowercase());
                    self.bump();
                }
                Ok(SExpr::Atom(s, start))
            }
        }
    }
}

/// Reads exactly one top-level expression; trailing non-comment text is an error.
pub fn read(text: &str) -> Result<SExpr, PddlError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, column: 1 },
    };
    let e = r.expr()?;
    r.skip_trivia();
    if r.chars.peek().is_some() {
        return Err(syntax(r.pos, "trailing input after top-level expression"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_comments() {
        let e = read("; header\n(Define (Domain X) ; trailing\n  (:predicates (p ?x)))").unwrap();
        assert_eq!(e.head(), Some("define"));
        let items = e.as_list().unwrap();
        assert_eq!(items[1].head(), Some("domain"));
        assert_eq!(items[1].as_list().unwrap()[1].as_atom(), Some("x"));
        assert_eq!(items[2].pos(), Pos { line: 3, column: 3 });
    }

    #[test]
    fn unclosed_paren_reports_position() {
        match read("\n  (define (domain d)") {
            Err(PddlError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stray_close_paren() {
        assert!(matches!(read("(a))"), Err(PddlError::Syntax { .. })));
        assert!(matches!(read(")"), Err(PddlError::Syntax { line: 1, column: 1, .. })));
    }
}
