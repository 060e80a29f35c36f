//! A small language for writing budgets.
//!
//! A file is a list of `def NAME = term;`. Definitions are macros: `@NAME`
//! expands to the referenced body. Expansion is hygienic, so a binder at the
//! use site never captures a free variable of the referenced definition.

mod lexer;
mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::dataterm::DataTerm;
use crate::eliminate::expand_let;
use crate::tuplix::{fresh_name, Tuplix};
use parser::{Parser, RawDef, Surface};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown reference @{name}")]
    UnknownReference { name: String, line: usize, col: usize },
    #[error("cyclic reference through @{0}")]
    CyclicReference(String),
    #[error("{line}:{col}: duplicate definition {name}")]
    DuplicateDefinition { name: String, line: usize, col: usize },
    #[error("no definition named {0}")]
    NoSuchDefinition(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    /// The body with references expanded and sugar removed.
    pub body: Tuplix,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceFile {
    pub defs: Vec<Definition>,
}

impl SourceFile {
    pub fn get(&self, name: &str) -> Result<&Tuplix, DslError> {
        self.defs
            .iter()
            .find(|d| d.name == name)
            .map(|d| &d.body)
            .ok_or_else(|| DslError::NoSuchDefinition(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|d| d.name.as_str())
    }
}

pub fn parse_file(text: &str) -> Result<SourceFile, DslError> {
    let raw = Parser::new(text)?.file()?;
    let mut index = BTreeMap::new();
    for (i, d) in raw.iter().enumerate() {
        if index.insert(d.name.clone(), i).is_some() {
            return Err(DslError::DuplicateDefinition {
                name: d.name.clone(),
                line: d.line,
                col: d.col,
            });
        }
    }
    let mut elab = Elaborator {
        raw: &raw,
        index,
        done: BTreeMap::new(),
        stack: Vec::new(),
    };
    let mut defs = Vec::new();
    for d in &raw {
        defs.push(Definition {
            name: d.name.clone(),
            body: elab.definition(&d.name)?,
        });
    }
    Ok(SourceFile { defs })
}

/// Parses a single term. References are not allowed.
pub fn parse_term(text: &str) -> Result<Tuplix, DslError> {
    let mut p = Parser::new(text)?;
    let s = p.term()?;
    p.finish()?;
    let mut elab = Elaborator {
        raw: &[],
        index: BTreeMap::new(),
        done: BTreeMap::new(),
        stack: Vec::new(),
    };
    elab.term(&s, &BTreeMap::new())
}

pub fn parse_data(text: &str) -> Result<DataTerm, DslError> {
    parser::parse_data(text)
}

/// Prints every definition with references expanded.
pub fn print_file(file: &SourceFile) -> String {
    let mut out = String::new();
    for d in &file.defs {
        let _ = writeln!(out, "def {} = {};", d.name, d.body);
    }
    out
}

struct Elaborator<'a> {
    raw: &'a [RawDef],
    index: BTreeMap<String, usize>,
    done: BTreeMap<String, Tuplix>,
    stack: Vec<String>,
}

/// Maps a variable as written to the name it has after renaming.
type Renames = BTreeMap<String, String>;

fn rename(p: &DataTerm, ren: &Renames) -> DataTerm {
    if ren.is_empty() {
        p.clone()
    } else {
        p.rename(ren)
    }
}

impl Elaborator<'_> {
    fn definition(&mut self, name: &str) -> Result<Tuplix, DslError> {
        if let Some(t) = self.done.get(name) {
            return Ok(t.clone());
        }
        if self.stack.iter().any(|n| n == name) {
            return Err(DslError::CyclicReference(name.to_string()));
        }
        let raw = &self.raw[self.index[name]];
        self.stack.push(name.to_string());
        let t = self.term(&raw.body, &Renames::new())?;
        self.stack.pop();
        self.done.insert(name.to_string(), t.clone());
        Ok(t)
    }

    fn lookup(&mut self, name: &str, line: usize, col: usize) -> Result<Tuplix, DslError> {
        if !self.index.contains_key(name) {
            return Err(DslError::UnknownReference {
                name: name.to_string(),
                line,
                col,
            });
        }
        self.definition(name)
    }

    /// Free data variables of the definitions referenced in `s`.
    fn ref_vars(&mut self, s: &Surface, out: &mut BTreeSet<String>) -> Result<(), DslError> {
        match s {
            Surface::Ref(name, line, col) => {
                out.extend(self.lookup(name, *line, *col)?.free_data_vars());
                Ok(())
            }
            Surface::Conj(x, y) | Surface::Choice(x, y) => {
                self.ref_vars(x, out)?;
                self.ref_vars(y, out)
            }
            Surface::Sum(_, b)
            | Surface::Let(_, _, b)
            | Surface::Scalar(_, b)
            | Surface::Clear(_, b)
            | Surface::Encap(_, b)
            | Surface::Select(_, b) => self.ref_vars(b, out),
            _ => Ok(()),
        }
    }

    /// The name a binder `u` gets so that no referenced definition's
    /// free `u` is captured.
    fn binder(&mut self, u: &str, body: &Surface, ren: &Renames) -> Result<(String, Renames), DslError> {
        let mut captured = BTreeSet::new();
        self.ref_vars(body, &mut captured)?;
        let mut inner = ren.clone();
        if captured.contains(u) {
            let mut avoid = captured;
            avoid.extend(surface_vars(body));
            avoid.extend(ren.values().cloned());
            let w = fresh_name(u, &avoid);
            inner.insert(u.to_string(), w.clone());
            Ok((w, inner))
        } else {
            inner.remove(u);
            Ok((u.to_string(), inner))
        }
    }

    fn term(&mut self, s: &Surface, ren: &Renames) -> Result<Tuplix, DslError> {
        Ok(match s {
            Surface::Empty => Tuplix::Empty,
            Surface::Null => Tuplix::Null,
            Surface::Entry(a, p) => Tuplix::Entry(a.clone(), rename(p, ren)),
            Surface::Test(p) => Tuplix::Test(rename(p, ren)),
            Surface::TVar(x) => Tuplix::var(x.clone()),
            Surface::Ref(name, line, col) => self.lookup(name, *line, *col)?,
            Surface::Conj(x, y) => Tuplix::conj(self.term(x, ren)?, self.term(y, ren)?),
            Surface::Choice(x, y) => Tuplix::choice(self.term(x, ren)?, self.term(y, ren)?),
            Surface::Sum(u, b) => {
                let (w, inner) = self.binder(u, b, ren)?;
                Tuplix::sum(w, self.term(b, &inner)?)
            }
            Surface::Let(u, p, b) => {
                let p = rename(p, ren);
                let (w, inner) = self.binder(u, b, ren)?;
                expand_let(&w, &p, &self.term(b, &inner)?)
            }
            Surface::Scalar(p, b) => Tuplix::scalar(rename(p, ren), self.term(b, ren)?),
            Surface::Clear(set, b) => Tuplix::clear(set.clone(), self.term(b, ren)?),
            Surface::Encap(set, b) => Tuplix::encap(set.clone(), self.term(b, ren)?),
            Surface::Select(keep, b) => {
                let t = self.term(b, ren)?;
                let drop = t.attributes().difference(keep).cloned().collect();
                Tuplix::clear(drop, t)
            }
        })
    }
}

fn surface_vars(s: &Surface) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_surface_vars(s, &mut out);
    out
}

fn collect_surface_vars(s: &Surface, out: &mut BTreeSet<String>) {
    match s {
        Surface::Entry(_, p) | Surface::Test(p) => out.extend(p.vars()),
        Surface::Conj(x, y) | Surface::Choice(x, y) => {
            collect_surface_vars(x, out);
            collect_surface_vars(y, out);
        }
        Surface::Sum(u, b) => {
            out.insert(u.clone());
            collect_surface_vars(b, out);
        }
        Surface::Let(u, p, b) => {
            out.insert(u.clone());
            out.extend(p.vars());
            collect_surface_vars(b, out);
        }
        Surface::Scalar(p, b) => {
            out.extend(p.vars());
            collect_surface_vars(b, out);
        }
        Surface::Clear(_, b) | Surface::Encap(_, b) | Surface::Select(_, b) => {
            collect_surface_vars(b, out)
        }
        Surface::Empty | Surface::Null | Surface::TVar(_) | Surface::Ref(..) => {}
    }
}
