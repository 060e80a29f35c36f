//! Tuplix terms.
//!
//! The only binder is [`Tuplix::Sum`], which binds one data variable.
//! Substitution of data terms is capture-avoiding; binders that would
//! capture a variable of the substituted term are renamed to `stem'n`
//! with the smallest `n` not already in use, so renaming is reproducible.

use std::collections::BTreeSet;
use std::fmt;

use crate::dataterm::DataTerm;

/// An attribute name. The zero-test marker is not an attribute; tests are a
/// separate node kind.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute(String);

impl Attribute {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "attribute names are nonempty");
        Attribute(name)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Attribute {
    fn from(s: &str) -> Self {
        Attribute::new(s)
    }
}

pub type AttrSet = BTreeSet<Attribute>;

pub fn attr_set<'a>(names: impl IntoIterator<Item = &'a str>) -> AttrSet {
    names.into_iter().map(Attribute::new).collect()
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tuplix {
    /// ε
    Empty,
    /// δ
    Null,
    Entry(Attribute, DataTerm),
    /// ζ(p)
    Test(DataTerm),
    Conj(Box<Tuplix>, Box<Tuplix>),
    Choice(Box<Tuplix>, Box<Tuplix>),
    Sum(String, Box<Tuplix>),
    Scalar(DataTerm, Box<Tuplix>),
    Clear(AttrSet, Box<Tuplix>),
    Encap(AttrSet, Box<Tuplix>),
    /// A free tuplix variable.
    Var(String),
}

/// Shows the DSL rendering.
impl fmt::Debug for Tuplix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self)
    }
}

impl Tuplix {
    pub fn entry(a: impl Into<Attribute>, p: DataTerm) -> Self {
        Tuplix::Entry(a.into(), p)
    }

    pub fn test(p: DataTerm) -> Self {
        Tuplix::Test(p)
    }

    /// `~ζ(p) = ζ(1 - p/p)`.
    pub fn ntest(p: DataTerm) -> Self {
        Tuplix::Test(DataTerm::sub(DataTerm::one(), DataTerm::indicator(p)))
    }

    pub fn conj(a: Tuplix, b: Tuplix) -> Self {
        Tuplix::Conj(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Tuplix, b: Tuplix) -> Self {
        Tuplix::Choice(Box::new(a), Box::new(b))
    }

    pub fn sum(u: impl Into<String>, t: Tuplix) -> Self {
        Tuplix::Sum(u.into(), Box::new(t))
    }

    pub fn scalar(p: DataTerm, t: Tuplix) -> Self {
        Tuplix::Scalar(p, Box::new(t))
    }

    pub fn clear(set: AttrSet, t: Tuplix) -> Self {
        Tuplix::Clear(set, Box::new(t))
    }

    pub fn encap(set: AttrSet, t: Tuplix) -> Self {
        Tuplix::Encap(set, Box::new(t))
    }

    pub fn var(x: impl Into<String>) -> Self {
        Tuplix::Var(x.into())
    }

    /// Left-nested conjunction; ε when empty.
    pub fn conj_all(items: impl IntoIterator<Item = Tuplix>) -> Self {
        items
            .into_iter()
            .reduce(Tuplix::conj)
            .unwrap_or(Tuplix::Empty)
    }

    /// Left-nested choice; δ when empty.
    pub fn choice_all(items: impl IntoIterator<Item = Tuplix>) -> Self {
        items
            .into_iter()
            .reduce(Tuplix::choice)
            .unwrap_or(Tuplix::Null)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Tuplix::Empty => "eps",
            Tuplix::Null => "delta",
            Tuplix::Entry(..) => "entry",
            Tuplix::Test(_) => "test",
            Tuplix::Conj(..) => "conjunction",
            Tuplix::Choice(..) => "choice",
            Tuplix::Sum(..) => "sum",
            Tuplix::Scalar(..) => "scalar multiplication",
            Tuplix::Clear(..) => "clear",
            Tuplix::Encap(..) => "encap",
            Tuplix::Var(_) => "tuplix variable",
        }
    }

    fn children(&self) -> Vec<&Tuplix> {
        match self {
            Tuplix::Conj(a, b) | Tuplix::Choice(a, b) => vec![a, b],
            Tuplix::Sum(_, t) | Tuplix::Scalar(_, t) | Tuplix::Clear(_, t) | Tuplix::Encap(_, t) => {
                vec![t]
            }
            _ => vec![],
        }
    }

    /// True if any node satisfies `pred`.
    pub fn any(&self, pred: &impl Fn(&Tuplix) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn free_data_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |p: &DataTerm, bound: &Vec<String>| {
            for v in p.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Tuplix::Entry(_, p) | Tuplix::Test(p) => add(p, bound),
            Tuplix::Scalar(p, t) => {
                add(p, bound);
                t.collect_free(bound, out);
            }
            Tuplix::Sum(u, t) => {
                bound.push(u.clone());
                t.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Every data variable name occurring anywhere, bound or free.
    pub fn all_data_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Tuplix::Entry(_, p) | Tuplix::Test(p) => p.collect_vars(out),
            Tuplix::Scalar(p, t) => {
                p.collect_vars(out);
                t.collect_all_vars(out);
            }
            Tuplix::Sum(u, t) => {
                out.insert(u.clone());
                t.collect_all_vars(out);
            }
            _ => {
                for c in self.children() {
                    c.collect_all_vars(out);
                }
            }
        }
    }

    pub fn tuplix_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_tvars(&mut out);
        out
    }

    fn collect_tvars(&self, out: &mut BTreeSet<String>) {
        if let Tuplix::Var(x) = self {
            out.insert(x.clone());
        }
        for c in self.children() {
            c.collect_tvars(out);
        }
    }

    /// Attributes occurring in entries.
    pub fn attributes(&self) -> AttrSet {
        let mut out = AttrSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs(&self, out: &mut AttrSet) {
        if let Tuplix::Entry(a, _) = self {
            out.insert(a.clone());
        }
        for c in self.children() {
            c.collect_attrs(out);
        }
    }

    pub fn is_tuplix_closed(&self) -> bool {
        !self.any(&|t| matches!(t, Tuplix::Var(_)))
    }

    pub fn is_closed(&self) -> bool {
        self.is_tuplix_closed() && self.free_data_vars().is_empty()
    }

    /// `self[p/u]`, renaming binders so that no variable of `p` is captured.
    pub fn subst_data(&self, u: &str, p: &DataTerm) -> Tuplix {
        let pvars = p.vars();
        self.subst_inner(u, p, &pvars)
    }

    fn subst_inner(&self, u: &str, p: &DataTerm, pvars: &BTreeSet<String>) -> Tuplix {
        match self {
            Tuplix::Empty | Tuplix::Null | Tuplix::Var(_) => self.clone(),
            Tuplix::Entry(a, q) => Tuplix::Entry(a.clone(), q.subst(u, p)),
            Tuplix::Test(q) => Tuplix::Test(q.subst(u, p)),
            Tuplix::Conj(a, b) => Tuplix::conj(a.subst_inner(u, p, pvars), b.subst_inner(u, p, pvars)),
            Tuplix::Choice(a, b) => {
                Tuplix::choice(a.subst_inner(u, p, pvars), b.subst_inner(u, p, pvars))
            }
            Tuplix::Scalar(q, t) => Tuplix::scalar(q.subst(u, p), t.subst_inner(u, p, pvars)),
            Tuplix::Clear(set, t) => Tuplix::clear(set.clone(), t.subst_inner(u, p, pvars)),
            Tuplix::Encap(set, t) => Tuplix::encap(set.clone(), t.subst_inner(u, p, pvars)),
            Tuplix::Sum(v, body) => {
                if v == u || !body.free_data_vars().contains(u) {
                    return self.clone();
                }
                if pvars.contains(v) {
                    let mut avoid = body.all_data_vars();
                    avoid.extend(pvars.iter().cloned());
                    avoid.insert(u.to_string());
                    let w = fresh_name(v, &avoid);
                    let renamed = body.subst_data(v, &DataTerm::var(w.clone()));
                    Tuplix::sum(w, renamed.subst_inner(u, p, pvars))
                } else {
                    Tuplix::sum(v.clone(), body.subst_inner(u, p, pvars))
                }
            }
        }
    }

    /// Equality up to consistent renaming of `Sum` binders.
    pub fn alpha_equal(&self, other: &Tuplix) -> bool {
        alpha_eq(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

/// `stem'n` for the least `n ≥ 1` not in `avoid`, where `stem` is `base`
/// with any previous `'suffix` removed.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.split('\'').next().unwrap_or(base);
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|n| format!("{}'{}", stem, n))
        .find(|c| !avoid.contains(c))
        .expect("unbounded supply of names")
}

fn var_eq(x: &str, y: &str, ls: &[String], rs: &[String]) -> bool {
    let ix = ls.iter().rposition(|b| b == x);
    let iy = rs.iter().rposition(|b| b == y);
    match (ix, iy) {
        (Some(i), Some(j)) => i == j,
        (None, None) => x == y,
        _ => false,
    }
}

fn data_eq(p: &DataTerm, q: &DataTerm, ls: &[String], rs: &[String]) -> bool {
    use DataTerm as D;
    match (p, q) {
        (D::Const(a), D::Const(b)) => a == b,
        (D::Var(x), D::Var(y)) => var_eq(x, y, ls, rs),
        (D::Add(a1, b1), D::Add(a2, b2)) | (D::Mul(a1, b1), D::Mul(a2, b2)) => {
            data_eq(a1, a2, ls, rs) && data_eq(b1, b2, ls, rs)
        }
        (D::Neg(a), D::Neg(b)) | (D::Inv(a), D::Inv(b)) | (D::Abs(a), D::Abs(b)) => {
            data_eq(a, b, ls, rs)
        }
        _ => false,
    }
}

fn alpha_eq(s: &Tuplix, t: &Tuplix, ls: &mut Vec<String>, rs: &mut Vec<String>) -> bool {
    use Tuplix as T;
    match (s, t) {
        (T::Empty, T::Empty) | (T::Null, T::Null) => true,
        (T::Var(x), T::Var(y)) => x == y,
        (T::Entry(a, p), T::Entry(b, q)) => a == b && data_eq(p, q, ls, rs),
        (T::Test(p), T::Test(q)) => data_eq(p, q, ls, rs),
        (T::Conj(a1, b1), T::Conj(a2, b2)) | (T::Choice(a1, b1), T::Choice(a2, b2)) => {
            alpha_eq(a1, a2, ls, rs) && alpha_eq(b1, b2, ls, rs)
        }
        (T::Scalar(p, a), T::Scalar(q, b)) => data_eq(p, q, ls, rs) && alpha_eq(a, b, ls, rs),
        (T::Clear(i, a), T::Clear(j, b)) | (T::Encap(i, a), T::Encap(j, b)) => {
            i == j && alpha_eq(a, b, ls, rs)
        }
        (T::Sum(u, a), T::Sum(v, b)) => {
            ls.push(u.clone());
            rs.push(v.clone());
            let eq = alpha_eq(a, b, ls, rs);
            ls.pop();
            rs.pop();
            eq
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataterm::DataTerm as D;

    fn a(p: D) -> Tuplix {
        Tuplix::entry("a", p)
    }
    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    /// Independent route for alpha-equivalence: rename binders positionally
    /// to `#0`, `#1`, … in pre-order, then compare structurally.
    fn positional(t: &Tuplix) -> Tuplix {
        fn go(t: &Tuplix, counter: &mut usize) -> Tuplix {
            match t {
                Tuplix::Sum(u, body) => {
                    let name = format!("#{}", counter);
                    *counter += 1;
                    let renamed = body.subst_data(u, &D::var(name.clone()));
                    Tuplix::sum(name, go(&renamed, counter))
                }
                Tuplix::Conj(x, y) => {
                    let x = go(x, counter);
                    Tuplix::conj(x, go(y, counter))
                }
                Tuplix::Choice(x, y) => {
                    let x = go(x, counter);
                    Tuplix::choice(x, go(y, counter))
                }
                Tuplix::Scalar(p, b) => Tuplix::scalar(p.clone(), go(b, counter)),
                Tuplix::Clear(s, b) => Tuplix::clear(s.clone(), go(b, counter)),
                Tuplix::Encap(s, b) => Tuplix::encap(s.clone(), go(b, counter)),
                _ => t.clone(),
            }
        }
        go(t, &mut 0)
    }

    #[test]
    fn free_vars() {
        let t = Tuplix::sum("u", Tuplix::conj(a(D::var("u")), Tuplix::entry("b", D::var("v"))));
        assert_eq!(t.free_data_vars(), set(&["v"]));
        let seven_v = D::mul(D::int(7), D::var("v"));
        let z = Tuplix::test(D::sub(D::sub(D::var("u"), seven_v), D::one()));
        assert_eq!(z.free_data_vars(), set(&["u", "v"]));
        assert!(Tuplix::Empty.free_data_vars().is_empty());
    }

    #[test]
    fn subst_bound_untouched() {
        let t = Tuplix::sum("u", a(D::var("u")));
        assert_eq!(t.subst_data("u", &D::int(3)), t);
    }

    #[test]
    fn subst_free() {
        let t = Tuplix::conj(a(D::var("u")), Tuplix::entry("b", D::var("v")));
        let p = D::add(D::var("v"), D::one());
        assert_eq!(
            t.subst_data("u", &p),
            Tuplix::conj(a(p.clone()), Tuplix::entry("b", D::var("v")))
        );
    }

    #[test]
    fn subst_renames_capturing_binder() {
        let t = Tuplix::sum("v", a(D::add(D::var("u"), D::var("v"))));
        let out = t.subst_data("u", &D::var("v"));
        let expect = Tuplix::sum("w", a(D::add(D::var("v"), D::var("w"))));
        assert!(out.alpha_equal(&expect), "{:?}", out);
        assert_eq!(out.free_data_vars(), set(&["v"]));
        match out {
            Tuplix::Sum(w, _) => assert_eq!(w, "v'1"),
            _ => panic!(),
        }
    }

    #[test]
    fn alpha_examples() {
        let s = Tuplix::sum("u", a(D::var("u")));
        let t = Tuplix::sum("v", a(D::var("v")));
        assert!(s.alpha_equal(&t));
        let t2 = Tuplix::sum("u", a(D::add(D::var("u"), D::one())));
        assert!(!s.alpha_equal(&t2));

        let l = Tuplix::sum("u", Tuplix::sum("v", a(D::sub(D::var("u"), D::var("v")))));
        let r = Tuplix::sum("v", Tuplix::sum("u", a(D::sub(D::var("v"), D::var("u")))));
        assert!(l.alpha_equal(&r));
        assert_eq!(positional(&l), positional(&r));
        // Swapped roles are not alpha-equal.
        let r2 = Tuplix::sum("v", Tuplix::sum("u", a(D::sub(D::var("u"), D::var("v")))));
        assert!(!l.alpha_equal(&r2));
        assert_ne!(positional(&l), positional(&r2));
    }

    #[test]
    fn free_variable_not_alpha_equal_to_bound() {
        let s = Tuplix::sum("u", a(D::var("v")));
        let t = Tuplix::sum("v", a(D::var("v")));
        assert!(!s.alpha_equal(&t));
        assert_ne!(positional(&s), positional(&t));
    }

    #[test]
    fn fresh_names_strip_suffix() {
        let avoid = set(&["u'1", "u'2"]);
        assert_eq!(fresh_name("u'1", &avoid), "u'3");
        assert_eq!(fresh_name("x", &avoid), "x'1");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_data(vars: Vec<&'static str>) -> impl Strategy<Value = D> {
            let leaf = prop_oneof![
                (-3i64..4).prop_map(D::int),
                prop::sample::select(vars).prop_map(D::var),
            ];
            leaf.prop_recursive(2, 6, 2, |inner| {
                prop_oneof![
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| D::add(a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| D::mul(a, b)),
                    inner.prop_map(D::neg),
                ]
            })
        }

        fn arb_term() -> impl Strategy<Value = Tuplix> {
            let vars = vec!["u", "v", "w"];
            let leaf = prop_oneof![
                Just(Tuplix::Empty),
                Just(Tuplix::Null),
                (prop::sample::select(vec!["a", "b"]), arb_data(vars.clone()))
                    .prop_map(|(n, p)| Tuplix::entry(n, p)),
                arb_data(vars.clone()).prop_map(Tuplix::test),
            ];
            leaf.prop_recursive(3, 16, 2, move |inner| {
                prop_oneof![
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Tuplix::conj(a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Tuplix::choice(a, b)),
                    (prop::sample::select(vec!["u", "v", "w"]), inner)
                        .prop_map(|(u, t)| Tuplix::sum(u, t)),
                ]
            })
        }

        proptest! {
            #[test]
            fn identity_substitution(t in arb_term()) {
                prop_assert!(t.subst_data("u", &D::var("u")).alpha_equal(&t));
            }

            #[test]
            fn substitution_free_vars(t in arb_term(), p in arb_data(vec!["v", "w", "x"])) {
                let fv = t.free_data_vars();
                prop_assume!(fv.contains("u"));
                let mut expect = fv.clone();
                expect.remove("u");
                expect.extend(p.vars());
                prop_assert_eq!(t.subst_data("u", &p).free_data_vars(), expect);
            }

            #[test]
            fn alpha_agrees_with_positional(s in arb_term(), t in arb_term()) {
                prop_assert_eq!(s.alpha_equal(&t), positional(&s) == positional(&t));
                prop_assert!(s.alpha_equal(&s));
                prop_assert_eq!(s.alpha_equal(&t), t.alpha_equal(&s));
            }

            #[test]
            fn alpha_invariant_under_renaming(t in arb_term()) {
                let renamed = positional(&t);
                prop_assert!(renamed.alpha_equal(&t));
                prop_assert!(t.alpha_equal(&renamed));
            }
        }
    }
}
