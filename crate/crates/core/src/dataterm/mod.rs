//! Symbolic data terms over the quantity sort.
//!
//! A [`DataTerm`] is a plain expression tree: there are no binders at this
//! level, so substitution is purely textual. Subtraction and division are
//! not separate nodes; `p - q` is `p + (-q)` and `p / q` is `p · inv(q)`.

mod oracle;
mod poly;

pub use oracle::{is_zero, sample_env, SamplePool, Validity};
pub use poly::{Atom, Monomial, Poly};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::meadow::Quantity;

/// An assignment of quantities to data variables.
pub type Env = BTreeMap<String, Quantity>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataError {
    #[error("unbound data variable `{0}`")]
    UnboundVariable(String),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataTerm {
    Const(Quantity),
    Var(String),
    Add(Box<DataTerm>, Box<DataTerm>),
    Mul(Box<DataTerm>, Box<DataTerm>),
    Neg(Box<DataTerm>),
    Inv(Box<DataTerm>),
    Abs(Box<DataTerm>),
}

// Smart constructors, not arithmetic.
#[allow(clippy::should_implement_trait)]
impl DataTerm {
    pub fn int(n: i64) -> Self {
        DataTerm::Const(Quantity::from_int(n))
    }

    pub fn konst(q: Quantity) -> Self {
        DataTerm::Const(q)
    }

    pub fn var(name: impl Into<String>) -> Self {
        DataTerm::Var(name.into())
    }

    pub fn zero() -> Self {
        DataTerm::int(0)
    }

    pub fn one() -> Self {
        DataTerm::int(1)
    }

    pub fn add(a: DataTerm, b: DataTerm) -> Self {
        DataTerm::Add(Box::new(a), Box::new(b))
    }

    /// `a - b`, i.e. `a + (-b)`.
    pub fn sub(a: DataTerm, b: DataTerm) -> Self {
        DataTerm::add(a, DataTerm::neg(b))
    }

    pub fn mul(a: DataTerm, b: DataTerm) -> Self {
        DataTerm::Mul(Box::new(a), Box::new(b))
    }

    /// `a / b`, i.e. `a · inv(b)`.
    pub fn div(a: DataTerm, b: DataTerm) -> Self {
        DataTerm::mul(a, DataTerm::inv(b))
    }

    pub fn neg(a: DataTerm) -> Self {
        DataTerm::Neg(Box::new(a))
    }

    pub fn inv(a: DataTerm) -> Self {
        DataTerm::Inv(Box::new(a))
    }

    pub fn abs(a: DataTerm) -> Self {
        DataTerm::Abs(Box::new(a))
    }

    /// `a^k` as a left-nested product; `a^0` is the constant one.
    pub fn pow(a: DataTerm, k: u32) -> Self {
        if k == 0 {
            return DataTerm::one();
        }
        let mut acc = a.clone();
        for _ in 1..k {
            acc = DataTerm::mul(acc, a.clone());
        }
        acc
    }

    /// `p / p`: zero when `p` is zero and one otherwise.
    pub fn indicator(p: DataTerm) -> Self {
        DataTerm::div(p.clone(), p)
    }

    /// Direct evaluation with the zero-totalized inverse.
    pub fn eval(&self, env: &Env) -> Result<Quantity, DataError> {
        Ok(match self {
            DataTerm::Const(c) => c.clone(),
            DataTerm::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| DataError::UnboundVariable(v.clone()))?,
            DataTerm::Add(a, b) => a.eval(env)?.add(&b.eval(env)?),
            DataTerm::Mul(a, b) => a.eval(env)?.mul(&b.eval(env)?),
            DataTerm::Neg(a) => a.eval(env)?.neg(),
            DataTerm::Inv(a) => a.eval(env)?.inv(),
            DataTerm::Abs(a) => a.eval(env)?.abs(),
        })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            DataTerm::Const(_) => {}
            DataTerm::Var(v) => {
                out.insert(v.clone());
            }
            DataTerm::Add(a, b) | DataTerm::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            DataTerm::Neg(a) | DataTerm::Inv(a) | DataTerm::Abs(a) => a.collect_vars(out),
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            DataTerm::Const(_) => false,
            DataTerm::Var(v) => v == var,
            DataTerm::Add(a, b) | DataTerm::Mul(a, b) => a.mentions(var) || b.mentions(var),
            DataTerm::Neg(a) | DataTerm::Inv(a) | DataTerm::Abs(a) => a.mentions(var),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            DataTerm::Const(_) => true,
            DataTerm::Var(_) => false,
            DataTerm::Add(a, b) | DataTerm::Mul(a, b) => a.is_closed() && b.is_closed(),
            DataTerm::Neg(a) | DataTerm::Inv(a) | DataTerm::Abs(a) => a.is_closed(),
        }
    }

    /// `self[q/u]`: replaces every occurrence of `u`.
    pub fn subst(&self, u: &str, q: &DataTerm) -> DataTerm {
        match self {
            DataTerm::Const(_) => self.clone(),
            DataTerm::Var(v) if v == u => q.clone(),
            DataTerm::Var(_) => self.clone(),
            DataTerm::Add(a, b) => DataTerm::add(a.subst(u, q), b.subst(u, q)),
            DataTerm::Mul(a, b) => DataTerm::mul(a.subst(u, q), b.subst(u, q)),
            DataTerm::Neg(a) => DataTerm::neg(a.subst(u, q)),
            DataTerm::Inv(a) => DataTerm::inv(a.subst(u, q)),
            DataTerm::Abs(a) => DataTerm::abs(a.subst(u, q)),
        }
    }

    /// Rename variables through `map`; unmapped variables are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> DataTerm {
        match self {
            DataTerm::Const(_) => self.clone(),
            DataTerm::Var(v) => DataTerm::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            DataTerm::Add(a, b) => DataTerm::add(a.rename(map), b.rename(map)),
            DataTerm::Mul(a, b) => DataTerm::mul(a.rename(map), b.rename(map)),
            DataTerm::Neg(a) => DataTerm::neg(a.rename(map)),
            DataTerm::Inv(a) => DataTerm::inv(a.rename(map)),
            DataTerm::Abs(a) => DataTerm::abs(a.rename(map)),
        }
    }

    pub fn normalize(&self) -> Poly {
        Poly::from_term(self)
    }

    fn precedence(&self) -> u8 {
        match self {
            DataTerm::Add(..) => 1,
            DataTerm::Mul(..) => 2,
            DataTerm::Const(c) if !c.is_integer() => 2,
            DataTerm::Const(c) if c.is_negative() => 3,
            DataTerm::Neg(_) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            DataTerm::Const(c) => write!(f, "{}", c),
            DataTerm::Var(v) => write!(f, "{}", v),
            DataTerm::Add(a, b) => {
                a.fmt_at(f, 1)?;
                match b.as_ref() {
                    DataTerm::Neg(inner) => {
                        write!(f, " - ")?;
                        inner.fmt_at(f, 2)
                    }
                    _ => {
                        write!(f, " + ")?;
                        b.fmt_at(f, 2)
                    }
                }
            }
            DataTerm::Mul(a, b) => {
                a.fmt_at(f, 2)?;
                match b.as_ref() {
                    DataTerm::Inv(inner) => {
                        write!(f, " / ")?;
                        inner.fmt_at(f, 3)
                    }
                    _ => {
                        write!(f, " * ")?;
                        b.fmt_at(f, 3)
                    }
                }
            }
            DataTerm::Neg(a) => {
                write!(f, "-")?;
                a.fmt_at(f, 4)
            }
            DataTerm::Inv(a) => {
                write!(f, "inv(")?;
                a.fmt_at(f, 0)?;
                write!(f, ")")
            }
            DataTerm::Abs(a) => {
                write!(f, "abs(")?;
                a.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

/// Prints a data term so that it binds at least as tightly as `min`
/// (1 for sums, 2 for products).
pub(crate) struct AtLevel<'a>(pub &'a DataTerm, pub u8);

impl fmt::Display for AtLevel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_at(f, self.1)
    }
}

/// Prints in the DSL expression syntax. Parser output re-parses to the
/// same tree.
impl fmt::Display for DataTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl fmt::Debug for DataTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self)
    }
}

impl From<Quantity> for DataTerm {
    fn from(q: Quantity) -> Self {
        DataTerm::Const(q)
    }
}
