//! Canonical forms for the conjunctive and basic fragments.
//!
//! A conjunctive canonical term is a conjunction of zero tests, at most one
//! entry per attribute and a multiset of tuplix variables. Tests are kept as
//! a sorted list of normalized conjuncts rather than folded into a single
//! `ζ(p/p + q/q)`; [`CtcCanonical::test`] produces the folded form on demand.
//! Keeping the conjuncts apart lets solved-form tests `u - p` drive
//! substitution into the entries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::dataterm::{is_zero, DataTerm, Env, Poly, Validity};
use crate::tuplix::{Attribute, Tuplix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("{0} is outside the conjunctive fragment")]
    NotCtcFragment(&'static str),
    #[error("{0} is outside the basic fragment; eliminate it first")]
    NotBtcFragment(&'static str),
}

/// Outcome of an equality check. `NotEqual` carries a data assignment
/// under which the two sides differ (empty for closed terms).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    NotEqual(Env),
    Unknown { samples: usize },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CtcCanonical {
    tests: Vec<Poly>,
    entries: BTreeMap<Attribute, Poly>,
    tvars: Vec<String>,
}

enum Conjunct {
    Drop,
    Null,
    Keep(Poly),
}

/// A polynomial with the same zero set as the single monomial `m`:
/// coefficients, exponents, `inv` and `abs` do not affect whether it is zero.
fn zero_equivalent(p: &Poly) -> Poly {
    let mut cur = p.clone();
    for _ in 0..8 {
        let Some((m, _)) = cur.as_monomial() else {
            break;
        };
        let mut acc = Poly::one();
        for (a, _) in m.atoms() {
            let factor = match a {
                crate::dataterm::Atom::Var(v) => Poly::var(v.clone()),
                crate::dataterm::Atom::Inv(q) | crate::dataterm::Atom::Abs(q) => (**q).clone(),
            };
            acc = acc.mul(&factor);
        }
        if acc == cur {
            break;
        }
        cur = acc;
    }
    cur
}

fn simplify_conjunct(p: Poly) -> Conjunct {
    if let Some(c) = p.as_constant() {
        return if c.is_zero() {
            Conjunct::Drop
        } else {
            Conjunct::Null
        };
    }
    let p = if p.as_monomial().is_some() {
        zero_equivalent(&p)
    } else {
        p
    };
    Conjunct::Keep(p.monic())
}

impl CtcCanonical {
    pub fn empty() -> Self {
        CtcCanonical {
            tests: Vec::new(),
            entries: BTreeMap::new(),
            tvars: Vec::new(),
        }
    }

    /// `ζ(1)`, the canonical representative of `δ`.
    pub fn null() -> Self {
        CtcCanonical {
            tests: vec![Poly::one()],
            ..CtcCanonical::empty()
        }
    }

    pub fn is_null(&self) -> bool {
        self.tests.len() == 1 && self.tests[0] == Poly::one()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty() && self.entries.is_empty() && self.tvars.is_empty()
    }

    pub fn tests(&self) -> &[Poly] {
        &self.tests
    }

    pub fn entries(&self) -> &BTreeMap<Attribute, Poly> {
        &self.entries
    }

    pub fn tvars(&self) -> &[String] {
        &self.tvars
    }

    /// All conjuncts folded into one test argument: zero exactly when every
    /// conjunct is zero.
    pub fn test(&self) -> Poly {
        match self.tests.len() {
            0 => Poly::zero(),
            1 => self.tests[0].clone(),
            _ => self
                .tests
                .iter()
                .fold(Poly::zero(), |acc, q| acc.add(&q.mul(&q.inv()))),
        }
    }

    /// Canonicalizes a conjunction given as its parts.
    pub fn from_parts(
        tests: Vec<Poly>,
        entries: BTreeMap<Attribute, Poly>,
        mut tvars: Vec<String>,
    ) -> Self {
        let mut conj: Vec<(Poly, bool)> = Vec::new();
        for t in tests {
            match simplify_conjunct(t) {
                Conjunct::Drop => {}
                Conjunct::Null => return CtcCanonical::null(),
                Conjunct::Keep(p) => conj.push((p, false)),
            }
        }
        conj.sort();
        conj.dedup();
        let mut entries = entries;

        // Solved-form propagation: t ⊗ ζ(u - p) = t[p/u] ⊗ ζ(u - p).
        loop {
            let mut pick = None;
            'search: for (i, (p, solved)) in conj.iter().enumerate() {
                if *solved {
                    continue;
                }
                for u in p.vars() {
                    if let Some((c, rest)) = p.linear_in(&u) {
                        pick = Some((i, u, rest.scale(&c.inv()).neg()));
                        break 'search;
                    }
                }
            }
            let Some((i, u, value)) = pick else {
                break;
            };
            conj[i].1 = true;
            let mut next = Vec::with_capacity(conj.len());
            for (j, (p, solved)) in conj.into_iter().enumerate() {
                if j == i {
                    next.push((p, solved));
                    continue;
                }
                match simplify_conjunct(p.subst(&u, &value)) {
                    Conjunct::Drop => {}
                    Conjunct::Null => return CtcCanonical::null(),
                    Conjunct::Keep(q) => next.push((q, solved)),
                }
            }
            conj = next;
            for v in entries.values_mut() {
                *v = v.subst(&u, &value);
            }
        }

        let mut tests: Vec<Poly> = conj.into_iter().map(|(p, _)| p).collect();
        tests.sort();
        tests.dedup();
        tvars.sort();
        CtcCanonical {
            tests,
            entries,
            tvars,
        }
    }

    /// Re-embeds the canonical form as a tuplix term.
    pub fn to_term(&self) -> Tuplix {
        if self.is_null() {
            return Tuplix::Null;
        }
        let mut parts: Vec<Tuplix> = Vec::new();
        parts.extend(self.tests.iter().map(|p| Tuplix::Test(p.to_term())));
        parts.extend(
            self.entries
                .iter()
                .map(|(a, p)| Tuplix::Entry(a.clone(), p.to_term())),
        );
        parts.extend(self.tvars.iter().map(|x| Tuplix::Var(x.clone())));
        Tuplix::conj_all(parts)
    }

    pub fn is_closed(&self) -> bool {
        self.tvars.is_empty()
            && self.tests.iter().all(|p| p.vars().is_empty())
            && self.entries.values().all(|p| p.vars().is_empty())
    }

    pub fn to_json(&self) -> Value {
        let entries: serde_json::Map<String, Value> = self
            .entries
            .iter()
            .map(|(a, p)| (a.name().to_string(), Value::String(p.to_string())))
            .collect();
        json!({
            "tests": self.tests.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "entries": entries,
            "tvars": self.tvars,
        })
    }
}

impl fmt::Display for CtcCanonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_null() {
            return write!(f, "delta");
        }
        if self.is_empty() {
            return write!(f, "eps");
        }
        let mut parts: Vec<String> = Vec::new();
        parts.extend(self.tests.iter().map(|p| format!("test({})", p)));
        parts.extend(self.entries.iter().map(|(a, p)| format!("{}({})", a, p)));
        parts.extend(self.tvars.iter().map(|x| format!("${}", x)));
        write!(f, "{}", parts.join(" & "))
    }
}

/// A finite choice of conjunctive canonical terms; the empty set is `δ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BtcCanonical(BTreeSet<CtcCanonical>);

impl BtcCanonical {
    pub fn alternatives(&self) -> &BTreeSet<CtcCanonical> {
        &self.0
    }

    pub fn is_null(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.0.iter().all(|c| c.is_closed())
    }

    pub fn to_term(&self) -> Tuplix {
        Tuplix::choice_all(self.0.iter().map(|c| c.to_term()))
    }

    pub fn to_json(&self) -> Value {
        json!({ "alternatives": self.0.iter().map(|c| c.to_json()).collect::<Vec<_>>() })
    }
}

impl fmt::Display for BtcCanonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "delta");
        }
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn collect_conjunction(t: &Tuplix, out: &mut Vec<Tuplix>) -> Result<(), NormalizeError> {
    match t {
        Tuplix::Conj(a, b) => {
            collect_conjunction(a, out)?;
            collect_conjunction(b, out)
        }
        Tuplix::Empty => Ok(()),
        Tuplix::Null | Tuplix::Entry(..) | Tuplix::Test(_) | Tuplix::Var(_) => {
            out.push(t.clone());
            Ok(())
        }
        other => Err(NormalizeError::NotCtcFragment(other.kind())),
    }
}

fn canonical_of_leaves(leaves: &[Tuplix]) -> CtcCanonical {
    let mut tests = Vec::new();
    let mut entries: BTreeMap<Attribute, Poly> = BTreeMap::new();
    let mut tvars = Vec::new();
    for leaf in leaves {
        match leaf {
            Tuplix::Null => return CtcCanonical::null(),
            Tuplix::Test(p) => tests.push(p.normalize()),
            Tuplix::Entry(a, p) => {
                let p = p.normalize();
                let slot = entries.entry(a.clone()).or_insert_with(Poly::zero);
                *slot = slot.add(&p);
            }
            Tuplix::Var(x) => tvars.push(x.clone()),
            _ => unreachable!("leaves are atomic"),
        }
    }
    CtcCanonical::from_parts(tests, entries, tvars)
}

/// Canonical form of a term built from `ε`, `δ`, entries, tests, tuplix
/// variables and `⊗`.
pub fn to_ctc_canonical(t: &Tuplix) -> Result<CtcCanonical, NormalizeError> {
    let mut leaves = Vec::new();
    collect_conjunction(t, &mut leaves)?;
    Ok(canonical_of_leaves(&leaves))
}

/// Sum-of-conjunctions expansion. Tests whose argument is syntactically a
/// product are split into a choice (`ζu + ζv = ζ(uv)`).
fn dnf(t: &Tuplix) -> Result<Vec<Vec<Tuplix>>, NormalizeError> {
    Ok(match t {
        Tuplix::Empty => vec![vec![]],
        Tuplix::Null => vec![],
        Tuplix::Entry(..) | Tuplix::Var(_) => vec![vec![t.clone()]],
        Tuplix::Test(p @ DataTerm::Mul(..)) => {
            let mut factors = Vec::new();
            flatten_product(p, &mut factors);
            factors
                .into_iter()
                .map(|f| vec![Tuplix::Test(f.clone())])
                .collect()
        }
        Tuplix::Test(_) => vec![vec![t.clone()]],
        Tuplix::Choice(a, b) => {
            let mut out = dnf(a)?;
            out.extend(dnf(b)?);
            out
        }
        Tuplix::Conj(a, b) => {
            let left = dnf(a)?;
            let right = dnf(b)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    let mut c = l.clone();
                    c.extend(r.iter().cloned());
                    out.push(c);
                }
            }
            out
        }
        other => return Err(NormalizeError::NotBtcFragment(other.kind())),
    })
}

fn flatten_product<'a>(p: &'a DataTerm, out: &mut Vec<&'a DataTerm>) {
    match p {
        DataTerm::Mul(a, b) => {
            flatten_product(a, out);
            flatten_product(b, out);
        }
        _ => out.push(p),
    }
}

/// Canonical form of a term in the basic fragment (no summation, scalar
/// multiplication, clearing or encapsulation).
pub fn to_btc_canonical(t: &Tuplix) -> Result<BtcCanonical, NormalizeError> {
    let mut set = BTreeSet::new();
    for leaves in dnf(t)? {
        split_product_tests(canonical_of_leaves(&leaves), &mut set);
    }
    Ok(BtcCanonical(set))
}

/// A test that normalized to a product of several atoms is split into one
/// alternative per factor, so that re-embedding the canonical form (which
/// prints such a test as a product) is a fixpoint.
fn split_product_tests(c: CtcCanonical, out: &mut BTreeSet<CtcCanonical>) {
    if c.is_null() {
        return;
    }
    let pos = c.tests.iter().position(|p| {
        p.as_monomial()
            .map(|(m, _)| m.atoms().count() > 1)
            .unwrap_or(false)
    });
    let Some(i) = pos else {
        out.insert(c);
        return;
    };
    let (m, _) = c.tests[i].as_monomial().expect("monomial test");
    let factors: Vec<Poly> = m.atoms().map(|(a, _)| Poly::from_atom(a.clone())).collect();
    for f in factors {
        let mut tests = c.tests.clone();
        tests[i] = f;
        split_product_tests(
            CtcCanonical::from_parts(tests, c.entries.clone(), c.tvars.clone()),
            out,
        );
    }
}

/// `~ζ(p) = ζ(1 - p/p)`.
pub fn zt_not(p: DataTerm) -> Tuplix {
    Tuplix::ntest(p)
}

/// Conjunction of `ζ(p)` and `ζ(q)` as one test argument.
pub fn zt_and(p: DataTerm, q: DataTerm) -> DataTerm {
    DataTerm::add(DataTerm::indicator(p), DataTerm::indicator(q))
}

/// Disjunction of `ζ(p)` and `ζ(q)` as one test argument.
pub fn zt_or(p: DataTerm, q: DataTerm) -> DataTerm {
    DataTerm::mul(p, q)
}

/// `p = 0` implies `q = 0`.
pub fn zt_implies(p: DataTerm, q: DataTerm) -> DataTerm {
    DataTerm::mul(DataTerm::sub(DataTerm::one(), DataTerm::indicator(p)), q)
}

/// `p ≤ q`, read as `|q - p| - (q - p) = 0`.
pub fn zt_leq(p: DataTerm, q: DataTerm) -> DataTerm {
    let d = DataTerm::sub(q, p);
    DataTerm::sub(DataTerm::abs(d.clone()), d)
}

fn poly_indicator(p: &Poly) -> DataTerm {
    DataTerm::indicator(p.to_term())
}

/// Combines per-check outcomes: any refutation wins, then any unknown.
struct Tally {
    unknown: Option<usize>,
}

impl Tally {
    fn check(&mut self, v: Validity) -> Option<Verdict> {
        match v {
            Validity::Valid => None,
            Validity::Invalid(env) => Some(Verdict::NotEqual(env)),
            Validity::Unknown { samples } => {
                self.unknown = Some(samples);
                None
            }
        }
    }
}

/// Equality of two conjunctive canonical forms.
///
/// A test difference, an entry difference where the test holds, or a
/// difference in attributes or tuplix variables where the test holds is a
/// refutation. `Equal` is reported only when every check is decided valid.
pub fn ctc_canonical_equal(
    s: &CtcCanonical,
    t: &CtcCanonical,
    samples: usize,
    seed: u64,
) -> Verdict {
    if s == t {
        return Verdict::Equal;
    }
    let p0 = s.test();
    let q0 = t.test();
    let mut tally = Tally { unknown: None };
    let same_test = DataTerm::sub(poly_indicator(&p0), poly_indicator(&q0));
    if let Some(v) = tally.check(is_zero(&same_test, samples, seed)) {
        return v;
    }
    // 1 - p0/p0 is nonzero exactly where s has an alternative.
    let holds = DataTerm::sub(DataTerm::one(), poly_indicator(&p0));
    let never_holds = || is_zero(&holds, samples, seed);
    let mut shapes_differ = s.tvars != t.tvars;
    let attrs: BTreeSet<&Attribute> = s.entries.keys().chain(t.entries.keys()).collect();
    for a in attrs {
        match (s.entries.get(a), t.entries.get(a)) {
            (Some(p), Some(q)) => {
                let diff = DataTerm::mul(holds.clone(), DataTerm::sub(p.to_term(), q.to_term()));
                if let Some(v) = tally.check(is_zero(&diff, samples, seed)) {
                    return v;
                }
            }
            _ => shapes_differ = true,
        }
    }
    if shapes_differ {
        if let Some(v) = tally.check(never_holds()) {
            return v;
        }
    }
    match tally.unknown {
        Some(samples) => Verdict::Unknown { samples },
        None => Verdict::Equal,
    }
}

/// Equality of two terms of the conjunctive fragment.
pub fn ctc_equal(
    s: &Tuplix,
    t: &Tuplix,
    samples: usize,
    seed: u64,
) -> Result<Verdict, NormalizeError> {
    let cs = to_ctc_canonical(s)?;
    let ct = to_ctc_canonical(t)?;
    Ok(ctc_canonical_equal(&cs, &ct, samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataterm::DataTerm as D;

    fn u() -> D {
        D::var("u")
    }
    fn v() -> D {
        D::var("v")
    }
    fn a(p: D) -> Tuplix {
        Tuplix::entry("a", p)
    }
    fn b(p: D) -> Tuplix {
        Tuplix::entry("b", p)
    }
    fn canon(t: &Tuplix) -> CtcCanonical {
        to_ctc_canonical(t).unwrap()
    }

    #[test]
    fn entries_merge() {
        let c = canon(&Tuplix::conj(a(u()), a(v())));
        assert!(c.tests().is_empty());
        assert_eq!(c.entries()[&Attribute::new("a")], D::add(u(), v()).normalize());
    }

    #[test]
    fn failing_test_nullifies() {
        let c = canon(&Tuplix::conj(Tuplix::test(D::one()), a(D::int(3))));
        assert!(c.is_null());
        assert_eq!(c.to_string(), "delta");
        assert!(canon(&Tuplix::conj(a(D::int(3)), Tuplix::Null)).is_null());
    }

    #[test]
    fn solved_test_propagates() {
        let t = Tuplix::conj_all([Tuplix::test(D::sub(u(), v())), a(u()), a(D::neg(v()))]);
        let c = canon(&t);
        assert_eq!(c.tests(), &[D::sub(u(), v()).normalize().monic()]);
        assert!(c.entries()[&Attribute::new("a")].is_zero());
        assert_eq!(c.to_string(), "test(v - u) & a(0)");
    }

    #[test]
    fn zero_entry_is_kept() {
        let c = canon(&a(D::zero()));
        assert_eq!(c.entries().len(), 1);
        assert_ne!(c, CtcCanonical::empty());
    }

    #[test]
    fn scaled_tests_coincide() {
        let c1 = canon(&Tuplix::test(D::mul(D::int(3), u())));
        let c2 = canon(&Tuplix::test(D::indicator(u())));
        let c3 = canon(&Tuplix::test(u()));
        assert_eq!(c1, c3);
        assert_eq!(c2, c3);
    }

    #[test]
    fn btc_examples() {
        let one = a(D::one());
        let c = to_btc_canonical(&Tuplix::choice(one.clone(), one.clone())).unwrap();
        assert_eq!(c.alternatives().len(), 1);
        let c = to_btc_canonical(&Tuplix::choice(one.clone(), Tuplix::Null)).unwrap();
        assert_eq!(c.to_string(), "a(1)");
        let t = Tuplix::conj(b(D::int(2)), Tuplix::choice(one, a(D::int(3))));
        let c = to_btc_canonical(&t).unwrap();
        assert_eq!(c.to_string(), "a(1) & b(2) + a(3) & b(2)");
    }

    #[test]
    fn product_tests_split() {
        let t = Tuplix::conj(Tuplix::test(D::mul(D::sub(u(), D::one()), v())), a(u()));
        let c = to_btc_canonical(&t).unwrap();
        assert_eq!(c.alternatives().len(), 2);
        assert_eq!(c.to_string(), "test(u - 1) & a(1) + test(v) & a(u)");
    }

    #[test]
    fn logic_helpers() {
        let c = to_btc_canonical(&zt_not(D::zero())).unwrap();
        assert!(c.is_null());
        let c = to_btc_canonical(&zt_not(D::one())).unwrap();
        assert_eq!(c.to_string(), "eps");
        let c = canon(&Tuplix::conj(zt_not(u()), Tuplix::test(u())));
        assert!(c.is_null());
        // and(0,0) holds; or(3,0) holds
        assert_eq!(canon(&Tuplix::test(zt_and(D::zero(), D::zero()))).to_string(), "eps");
        assert_eq!(canon(&Tuplix::test(zt_or(D::int(3), D::zero()))).to_string(), "eps");
    }

    /// Truth table for implication over the four zero/nonzero combinations.
    #[test]
    fn implication_truth_table() {
        for (p, q) in [(0, 0), (0, 5), (1, 0), (1, 5)] {
            let t = zt_implies(D::int(p), D::int(q));
            let holds = t.eval(&Env::new()).unwrap().is_zero();
            let expect = p != 0 || q == 0;
            assert_eq!(holds, expect, "p={} q={}", p, q);
        }
    }

    #[test]
    fn leq_reading() {
        for (p, q) in [(-2, 3), (3, 3), (4, 1), (0, -1)] {
            let t = zt_leq(D::int(p), D::int(q));
            assert_eq!(t.eval(&Env::new()).unwrap().is_zero(), p <= q);
        }
    }

    #[test]
    fn ctc_equal_examples() {
        let s = a(D::add(u(), v()));
        let t = a(D::add(v(), u()));
        assert_eq!(ctc_equal(&s, &t, 100, 1).unwrap(), Verdict::Equal);

        let zu = Tuplix::test(u());
        let zv = Tuplix::test(v());
        let zuv = Tuplix::test(D::sub(u(), v()));
        let s = Tuplix::conj(zu, zuv.clone());
        let t = Tuplix::conj(zv, zuv);
        assert_eq!(ctc_equal(&s, &t, 100, 1).unwrap(), Verdict::Equal);

        let r = ctc_equal(&a(D::one()), &a(D::int(2)), 100, 1).unwrap();
        assert_eq!(r, Verdict::NotEqual(Env::new()));
    }

    #[test]
    fn ctc_equal_refutes_open_difference() {
        let s = Tuplix::conj(Tuplix::test(u()), b(D::one()));
        let t = b(D::one());
        match ctc_equal(&s, &t, 100, 1).unwrap() {
            Verdict::NotEqual(env) => assert!(!env["u"].is_zero()),
            other => panic!("{:?}", other),
        }
    }
}
