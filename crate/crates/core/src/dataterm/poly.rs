//! Sparse polynomial normal form for data terms.
//!
//! `+`, `·` and `-` are expanded into a sum of monomials with rational
//! coefficients. Inverses are pushed inward as far as the meadow laws
//! allow: `inv(c) = 1/c`, `inv(-p) = -inv(p)`, `inv(p·q) = inv(p)·inv(q)`
//! and `inv(inv(p)) = p`. A remaining `inv(sum)` or `inv(var)`, and every
//! `abs(..)`, becomes an opaque atom keyed by the normal form of its
//! argument. Sum arguments are stored monic, so `inv(2u + 2v)` is
//! `1/2 · inv(u + v)` and shares its atom with `inv(v + u)`.
//!
//! Within a monomial an atom `x` and its inverse `x⁻¹` obey
//! `x^a · x^-b = x^(a-b)` for `a > b`, `x^-(b-a)` for `a < b` and
//! `x · x⁻¹` (the zero-test indicator, an idempotent) for `a = b`.
//! `x · x⁻¹` is never collapsed to 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{DataError, DataTerm, Env};
use crate::meadow::Quantity;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(String),
    Abs(Box<Poly>),
    Inv(Box<Poly>),
}

/// A multiset of atoms.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Atom, u32>);

/// Monomial → nonzero coefficient.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(BTreeMap<Monomial, Quantity>);

impl Atom {
    /// The atom whose value is the inverse of this one, for atoms that have
    /// one (`u ↦ inv(u)`, `abs(p) ↦ inv(abs(p))`).
    fn inverse_atom(&self) -> Option<Atom> {
        match self {
            Atom::Var(_) | Atom::Abs(_) => {
                Some(Atom::Inv(Box::new(Poly::from_atom(self.clone()))))
            }
            Atom::Inv(_) => None,
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Atom::Var(v) => {
                out.insert(v.clone());
            }
            Atom::Abs(p) | Atom::Inv(p) => p.collect_vars(out),
        }
    }

    fn mentions(&self, var: &str) -> bool {
        match self {
            Atom::Var(v) => v == var,
            Atom::Abs(p) | Atom::Inv(p) => p.mentions(var),
        }
    }

    fn eval(&self, env: &Env) -> Result<Quantity, DataError> {
        match self {
            Atom::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| DataError::UnboundVariable(v.clone())),
            Atom::Abs(p) => Ok(p.eval(env)?.abs()),
            Atom::Inv(p) => Ok(p.eval(env)?.inv()),
        }
    }

    fn to_term(&self) -> DataTerm {
        match self {
            Atom::Var(v) => DataTerm::Var(v.clone()),
            Atom::Abs(p) => DataTerm::abs(p.to_term()),
            Atom::Inv(p) => DataTerm::inv(p.to_term()),
        }
    }

    fn map_poly(&self, f: &impl Fn(&Atom) -> Option<Poly>) -> Poly {
        if let Some(p) = f(self) {
            return p;
        }
        match self {
            Atom::Var(_) => Poly::from_atom(self.clone()),
            Atom::Abs(p) => p.map_atoms(f).abs(),
            Atom::Inv(p) => p.map_atoms(f).inv(),
        }
    }
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(a: Atom) -> Self {
        let mut m = BTreeMap::new();
        m.insert(a, 1);
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Atom, u32)> {
        self.0.iter().map(|(a, e)| (a, *e))
    }

    pub fn degree_of(&self, var: &str) -> u32 {
        self.0
            .get(&Atom::Var(var.to_string()))
            .copied()
            .unwrap_or(0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (a, e) in &other.0 {
            *out.entry(a.clone()).or_insert(0) += e;
        }
        let mut m = Monomial(out);
        m.cancel_inverse_pairs();
        m
    }

    fn cancel_inverse_pairs(&mut self) {
        let pairs: Vec<(Atom, Atom)> = self
            .0
            .keys()
            .filter_map(|a| a.inverse_atom().map(|ia| (a.clone(), ia)))
            .filter(|(_, ia)| self.0.contains_key(ia))
            .collect();
        for (a, ia) in pairs {
            let ea = self.0[&a];
            let eb = self.0[&ia];
            if ea > eb {
                self.0.insert(a, ea - eb);
                self.0.remove(&ia);
            } else if ea < eb {
                self.0.insert(ia, eb - ea);
                self.0.remove(&a);
            } else {
                self.0.insert(a, 1);
                self.0.insert(ia, 1);
            }
        }
    }

    fn mentions(&self, var: &str) -> bool {
        self.0.keys().any(|a| a.mentions(var))
    }

    fn eval(&self, env: &Env) -> Result<Quantity, DataError> {
        let mut acc = Quantity::one();
        for (a, e) in &self.0 {
            acc = acc.mul(&a.eval(env)?.pow(*e));
        }
        Ok(acc)
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Quantity::one())
    }

    pub fn constant(c: Quantity) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Monomial::one(), c);
        }
        Poly(m)
    }

    pub fn from_atom(a: Atom) -> Self {
        let mut m = BTreeMap::new();
        m.insert(Monomial::atom(a), Quantity::one());
        Poly(m)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Poly::from_atom(Atom::Var(name.into()))
    }

    pub fn from_term(t: &DataTerm) -> Poly {
        match t {
            DataTerm::Const(c) => Poly::constant(c.clone()),
            DataTerm::Var(v) => Poly::var(v.clone()),
            DataTerm::Add(a, b) => Poly::from_term(a).add(&Poly::from_term(b)),
            DataTerm::Mul(a, b) => Poly::from_term(a).mul(&Poly::from_term(b)),
            DataTerm::Neg(a) => Poly::from_term(a).neg(),
            DataTerm::Inv(a) => Poly::from_term(a).inv(),
            DataTerm::Abs(a) => Poly::from_term(a).abs(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Quantity)> {
        self.0.iter()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Quantity> {
        match self.0.len() {
            0 => Some(Quantity::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// The single monomial with its coefficient, if there is exactly one.
    pub fn as_monomial(&self) -> Option<(&Monomial, &Quantity)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    /// Coefficient of the greatest monomial.
    pub fn leading_coeff(&self) -> Option<&Quantity> {
        self.0.values().next_back()
    }

    /// Scaled so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            Some(lc) => self.scale(&lc.inv()),
            None => Poly::zero(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            accumulate(&mut out, m.clone(), c);
        }
        Poly(out)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c.neg())).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Quantity) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c.mul(k))).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = BTreeMap::new();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                accumulate(&mut out, m1.mul(m2), &c1.mul(c2));
            }
        }
        Poly(out)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Totalized inverse, pushed through monomials.
    pub fn inv(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        if let Some((m, c)) = self.as_monomial() {
            let mut acc = Poly::constant(c.inv());
            for (a, e) in m.atoms() {
                let inv_atom = match a {
                    Atom::Inv(p) => (**p).clone(),
                    other => Poly::from_atom(other.inverse_atom().expect("var or abs atom")),
                };
                acc = acc.mul(&inv_atom.pow(e));
            }
            return acc;
        }
        let lc = self.leading_coeff().expect("nonzero").clone();
        Poly::constant(lc.inv()).mul(&Poly::from_atom(Atom::Inv(Box::new(self.monic()))))
    }

    pub fn abs(&self) -> Poly {
        if let Some(c) = self.as_constant() {
            return Poly::constant(c.abs());
        }
        let lc = self.leading_coeff().expect("nonconstant").clone();
        Poly::constant(lc.abs()).mul(&Poly::from_atom(Atom::Abs(Box::new(self.monic()))))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for m in self.0.keys() {
            for a in m.0.keys() {
                a.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.0.keys().any(|m| m.mentions(var))
    }

    /// True when no `inv` or `abs` atom occurs.
    pub fn is_polynomial(&self) -> bool {
        self.0
            .keys()
            .all(|m| m.0.keys().all(|a| matches!(a, Atom::Var(_))))
    }

    pub fn eval(&self, env: &Env) -> Result<Quantity, DataError> {
        let mut acc = Quantity::zero();
        for (m, c) in &self.0 {
            acc = acc.add(&c.mul(&m.eval(env)?));
        }
        Ok(acc)
    }

    /// Rebuild every atom through `f` (falling back to the atom itself) and
    /// re-normalize.
    fn map_atoms(&self, f: &impl Fn(&Atom) -> Option<Poly>) -> Poly {
        let mut acc = Poly::zero();
        for (m, c) in &self.0 {
            let mut term = Poly::constant(c.clone());
            for (a, e) in &m.0 {
                term = term.mul(&a.map_poly(f).pow(*e));
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// `self[q/u]`, re-normalized.
    pub fn subst(&self, u: &str, q: &Poly) -> Poly {
        if !self.mentions(u) {
            return self.clone();
        }
        self.map_atoms(&|a| match a {
            Atom::Var(v) if v == u => Some(q.clone()),
            _ => None,
        })
    }

    /// Splits `self = c·u + rest` where `c` is a nonzero constant and `u`
    /// does not occur in `rest` (not even inside atoms).
    pub fn linear_in(&self, u: &str) -> Option<(Quantity, Poly)> {
        let lin = Monomial::atom(Atom::Var(u.to_string()));
        let c = self.0.get(&lin)?.clone();
        let mut rest = self.0.clone();
        rest.remove(&lin);
        if rest.keys().any(|m| m.mentions(u)) {
            return None;
        }
        Some((c, Poly(rest)))
    }

    /// Coefficients (ascending degree) when the only atom is the variable `u`.
    pub fn univariate(&self, u: &str) -> Option<Vec<Quantity>> {
        let target = Atom::Var(u.to_string());
        let mut coeffs: Vec<Quantity> = Vec::new();
        for (m, c) in &self.0 {
            let deg = match m.0.len() {
                0 => 0,
                1 => {
                    let (a, e) = m.0.iter().next().unwrap();
                    if *a != target {
                        return None;
                    }
                    *e as usize
                }
                _ => return None,
            };
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, Quantity::zero());
            }
            coeffs[deg] = c.clone();
        }
        Some(coeffs)
    }

    /// Re-embeds the normal form as a data term.
    pub fn to_term(&self) -> DataTerm {
        let mut acc: Option<DataTerm> = None;
        for (m, c) in &self.0 {
            let term = if m.is_one() {
                DataTerm::Const(c.clone())
            } else {
                let mut factor: Option<DataTerm> = None;
                for (a, e) in &m.0 {
                    for _ in 0..*e {
                        let at = a.to_term();
                        factor = Some(match factor {
                            None => at,
                            Some(f) => DataTerm::mul(f, at),
                        });
                    }
                }
                let factor = factor.expect("non-unit monomial");
                if c.is_one() {
                    factor
                } else {
                    DataTerm::mul(DataTerm::Const(c.clone()), factor)
                }
            };
            acc = Some(match acc {
                None => term,
                Some(s) => DataTerm::add(s, term),
            });
        }
        acc.unwrap_or_else(DataTerm::zero)
    }
}

fn accumulate(out: &mut BTreeMap<Monomial, Quantity>, m: Monomial, c: &Quantity) {
    let sum = match out.get(&m) {
        Some(prev) => prev.add(c),
        None => c.clone(),
    };
    if sum.is_zero() {
        out.remove(&m);
    } else {
        out.insert(m, sum);
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => write!(f, "{}", v),
            Atom::Abs(p) => write!(f, "abs({})", p),
            Atom::Inv(p) => write!(f, "inv({})", p),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{}", a)?;
            } else {
                write!(f, "{}^{}", a, e)?;
            }
        }
        Ok(())
    }
}

/// Highest monomial first, so constants come last: `u^2 - 1`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.0.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            if m.is_one() {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", mag, m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> DataTerm {
        DataTerm::var("u")
    }
    fn v() -> DataTerm {
        DataTerm::var("v")
    }

    #[test]
    fn commutativity_difference_is_zero() {
        let t = DataTerm::sub(DataTerm::add(u(), v()), DataTerm::add(v(), u()));
        assert!(t.normalize().is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let t = DataTerm::mul(
            DataTerm::add(u(), DataTerm::one()),
            DataTerm::sub(u(), DataTerm::one()),
        );
        let expect = DataTerm::sub(DataTerm::pow(u(), 2), DataTerm::one()).normalize();
        assert_eq!(t.normalize(), expect);
        assert_eq!(t.normalize().to_string(), "u^2 - 1");
    }

    #[test]
    fn double_inverse() {
        assert_eq!(DataTerm::inv(DataTerm::inv(u())).normalize(), Poly::var("u"));
        let s = DataTerm::add(u(), v());
        assert_eq!(DataTerm::inv(DataTerm::inv(s.clone())).normalize(), s.normalize());
    }

    #[test]
    fn inverse_rewrites() {
        // inv(-u) = -inv(u); inv(2u) = 1/2 inv(u); inv(u v) = inv(u) inv(v)
        assert_eq!(
            DataTerm::inv(DataTerm::neg(u())).normalize(),
            DataTerm::inv(u()).normalize().neg()
        );
        assert_eq!(
            DataTerm::inv(DataTerm::mul(DataTerm::int(2), u())).normalize(),
            DataTerm::inv(u()).normalize().scale(&Quantity::ratio(1, 2))
        );
        assert_eq!(
            DataTerm::inv(DataTerm::mul(u(), v())).normalize(),
            DataTerm::mul(DataTerm::inv(u()), DataTerm::inv(v())).normalize()
        );
        assert!(DataTerm::inv(DataTerm::zero()).normalize().is_zero());
    }

    #[test]
    fn shared_inverse_atoms() {
        let a = DataTerm::inv(DataTerm::add(u(), v())).normalize();
        let b = DataTerm::inv(DataTerm::add(v(), u())).normalize();
        assert_eq!(a, b);
        let c = DataTerm::inv(DataTerm::mul(DataTerm::int(3), DataTerm::add(v(), u()))).normalize();
        assert_eq!(c, a.scale(&Quantity::ratio(1, 3)));
    }

    #[test]
    fn indicator_is_not_one() {
        let t = DataTerm::indicator(u()).normalize();
        assert_ne!(t, Poly::one());
        // (u/u)^2 = u/u and u·(u·inv(u)) = u
        let sq = DataTerm::mul(DataTerm::indicator(u()), DataTerm::indicator(u())).normalize();
        assert_eq!(sq, t);
        let law = DataTerm::mul(u(), DataTerm::indicator(u())).normalize();
        assert_eq!(law, Poly::var("u"));
    }

    #[test]
    fn conditional_product_vanishes() {
        // (1 - u/u)·(u·v) normalizes to zero
        let t = DataTerm::mul(
            DataTerm::sub(DataTerm::one(), DataTerm::indicator(u())),
            DataTerm::mul(u(), v()),
        );
        assert!(t.normalize().is_zero());
    }

    #[test]
    fn abs_is_opaque_but_scaled() {
        let a = DataTerm::abs(DataTerm::mul(DataTerm::int(-2), DataTerm::sub(u(), v())));
        let b = DataTerm::mul(DataTerm::int(2), DataTerm::abs(DataTerm::sub(v(), u())));
        assert_eq!(a.normalize(), b.normalize());
        assert_eq!(DataTerm::abs(DataTerm::int(-3)).normalize(), Poly::constant(Quantity::from_int(3)));
    }

    #[test]
    fn linear_and_univariate_views() {
        let p = DataTerm::sub(
            DataTerm::mul(DataTerm::int(2), u()),
            DataTerm::add(DataTerm::mul(DataTerm::int(7), v()), DataTerm::one()),
        )
        .normalize();
        let (c, rest) = p.linear_in("u").unwrap();
        assert_eq!(c, Quantity::from_int(2));
        assert!(!rest.mentions("u"));
        // u appears inside an atom: not linear
        let q = DataTerm::add(u(), DataTerm::inv(DataTerm::add(u(), v()))).normalize();
        assert!(q.linear_in("u").is_none());

        let sq = DataTerm::sub(DataTerm::pow(u(), 2), DataTerm::one()).normalize();
        assert_eq!(
            sq.univariate("u").unwrap(),
            vec![Quantity::from_int(-1), Quantity::zero(), Quantity::one()]
        );
        assert!(p.univariate("u").is_none());
    }

    #[test]
    fn subst_renormalizes() {
        let p = DataTerm::sub(u(), DataTerm::mul(DataTerm::int(7), v())).normalize();
        let q = DataTerm::mul(DataTerm::int(7), v()).normalize();
        assert!(p.subst("u", &q).is_zero());
        let r = DataTerm::inv(DataTerm::sub(u(), v())).normalize();
        assert!(r.subst("u", &Poly::var("v")).is_zero());
    }

    #[test]
    fn embedding_is_stable() {
        let terms = [
            DataTerm::mul(DataTerm::indicator(DataTerm::add(u(), v())), u()),
            DataTerm::abs(DataTerm::sub(u(), DataTerm::int(3))),
            DataTerm::div(DataTerm::one(), DataTerm::mul(u(), DataTerm::add(v(), DataTerm::int(2)))),
        ];
        for t in terms {
            let p = t.normalize();
            assert_eq!(p.to_term().normalize(), p, "{}", t);
        }
    }
}
