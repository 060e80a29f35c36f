use std::fmt;

use crate::dataterm::AtLevel;
use crate::tuplix::{AttrSet, Tuplix};

fn level(t: &Tuplix) -> u8 {
    match t {
        Tuplix::Choice(..) => 0,
        Tuplix::Conj(..) => 1,
        Tuplix::Sum(..) | Tuplix::Scalar(..) | Tuplix::Clear(..) | Tuplix::Encap(..) => 2,
        _ => 3,
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, set: &AttrSet) -> fmt::Result {
    let names: Vec<&str> = set.iter().map(|a| a.name()).collect();
    write!(f, "{{{}}}", names.join(", "))
}

fn write_at(f: &mut fmt::Formatter<'_>, t: &Tuplix, min: u8) -> fmt::Result {
    if level(t) < min {
        write!(f, "(")?;
        write_at(f, t, 0)?;
        return write!(f, ")");
    }
    match t {
        Tuplix::Empty => write!(f, "eps"),
        Tuplix::Null => write!(f, "delta"),
        Tuplix::Entry(a, p) => write!(f, "{}({})", a, p),
        Tuplix::Test(p) => write!(f, "test({})", p),
        Tuplix::Var(x) => write!(f, "${}", x),
        Tuplix::Conj(x, y) => {
            write_at(f, x, 1)?;
            write!(f, " & ")?;
            write_at(f, y, 2)
        }
        Tuplix::Choice(x, y) => {
            write_at(f, x, 0)?;
            write!(f, " + ")?;
            write_at(f, y, 1)
        }
        Tuplix::Sum(u, body) => {
            write!(f, "sum {} . ", u)?;
            write_at(f, body, 2)
        }
        Tuplix::Scalar(p, body) => {
            write!(f, "{} * ", AtLevel(p, 2))?;
            // `p * q * t` would re-read as `(p * q) * t`.
            let min = if matches!(**body, Tuplix::Scalar(..)) { 3 } else { 2 };
            write_at(f, body, min)
        }
        Tuplix::Clear(set, body) | Tuplix::Encap(set, body) => {
            write!(f, "{}", if matches!(t, Tuplix::Clear(..)) { "clear" } else { "encap" })?;
            write_set(f, set)?;
            write!(f, " ")?;
            write_at(f, body, 2)
        }
    }
}

/// Prints in the DSL syntax.
impl fmt::Display for Tuplix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(f, self, 0)
    }
}
