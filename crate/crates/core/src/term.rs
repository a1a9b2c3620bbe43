//! A tiny term language shared by sequence descriptors and functional ids.
//!
//! `name` or `name(arg, arg, ...)`; atoms are any run of characters other
//! than whitespace, commas and parentheses.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Atom(String),
    Call(String, Vec<Term>),
}

impl Term {
    pub fn head(&self) -> &str {
        match self {
            Term::Atom(a) => a,
            Term::Call(h, _) => h,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Atom(_) => &[],
            Term::Call(_, args) => args,
        }
    }

    pub fn call(head: &str, args: Vec<Term>) -> Term {
        Term::Call(head.to_string(), args)
    }

    pub fn atom(a: impl ToString) -> Term {
        Term::Atom(a.to_string())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Term::Atom(a) => Some(a),
            Term::Call(..) => None,
        }
    }

    pub fn parse(input: &str) -> Result<Term> {
        let mut p = Parser { src: input, pos: 0 };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != input.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(a) => f.write_str(a),
            Term::Call(h, args) => {
                write!(f, "{h}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { input: self.src.to_string(), message: format!("{msg} at byte {}", self.pos) }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn atom(&mut self) -> Result<String> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == ',' || c == '(' || c == ')' {
                break;
            }
            self.pos += c.len_utf8();
        }
        if start == self.pos {
            return Err(self.err("expected a name"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        let head = self.atom()?;
        self.skip_ws();
        if self.peek() != Some('(') {
            return Ok(Term::Atom(head));
        }
        self.pos += 1;
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(Term::Call(head, args));
        }
        loop {
            args.push(self.term()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(Term::Call(head, args));
                }
                _ => return Err(self.err("expected `,` or `)`")),
            }
        }
    }
}

/// Split on commas that are not nested inside parentheses.
pub fn split_top_level(input: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in input.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(input[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(input[start..].trim());
    parts
}

pub(crate) fn parse_u64(t: &Term) -> Result<u64> {
    let a = t
        .as_atom()
        .ok_or_else(|| Error::Parse { input: t.to_string(), message: "expected a natural number".into() })?;
    a.parse().map_err(|_| Error::Parse { input: a.to_string(), message: "expected a natural number".into() })
}

pub(crate) fn parse_bit(t: &Term) -> Result<bool> {
    match t.as_atom() {
        Some("0") => Ok(false),
        Some("1") => Ok(true),
        _ => Err(Error::Parse { input: t.to_string(), message: "expected 0 or 1".into() }),
    }
}

pub(crate) fn expect_arity(t: &Term, n: usize) -> Result<()> {
    if t.args().len() != n {
        return Err(Error::Parse { input: t.to_string(), message: format!("`{}` takes {n} argument(s)", t.head()) });
    }
    Ok(())
}
