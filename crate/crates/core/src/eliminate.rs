//! Elimination of summation, scalar multiplication, clearing and
//! encapsulation.
//!
//! A term is first brought into a prenex form: a finite choice of
//! alternatives, each a block of summation binders over a conjunction of
//! tests, single entries per attribute and tuplix variables. Binders are
//! renamed apart on the way in, which discharges the side conditions of the
//! hoisting rules. Encapsulation then turns each accumulated entry into a
//! zero test, and binders are solved from their tests:
//!
//! * an affine test `c·u + r` substitutes `u := -r/c`;
//! * a univariate test with rational roots is split into one alternative
//!   per root (leftover irreducible factors become a separate alternative);
//! * `Σ_u ~ζ(u - p)` with no other occurrence of `u` is `ε`.
//!
//! Binders that none of these rules can remove are kept and reported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dataterm::{Atom, DataTerm, Poly};
use crate::meadow::Quantity;
use crate::tuplix::{fresh_name, AttrSet, Attribute, Tuplix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElimError {
    #[error("scalar multiplication over tuplix variable ${0}")]
    ScalarOverTuplixVariable(String),
    #[error("clearing over tuplix variable ${0}")]
    ClearOverTuplixVariable(String),
    #[error("encapsulation over tuplix variable ${0}")]
    EncapOverTuplixVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<5} {}", self.rule, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationReport {
    pub result: Tuplix,
    pub steps: Vec<Step>,
    /// Set when some summation binder could not be removed.
    pub residual: bool,
}

#[derive(Debug, Clone)]
struct Alt {
    binders: Vec<String>,
    tests: Vec<Poly>,
    entries: BTreeMap<Attribute, Poly>,
    tvars: Vec<String>,
}

impl Alt {
    fn empty() -> Self {
        Alt {
            binders: Vec::new(),
            tests: Vec::new(),
            entries: BTreeMap::new(),
            tvars: Vec::new(),
        }
    }

    fn conj(&self, other: &Alt) -> Alt {
        let mut entries = self.entries.clone();
        for (a, p) in &other.entries {
            let slot = entries.entry(a.clone()).or_insert_with(Poly::zero);
            *slot = slot.add(p);
        }
        Alt {
            binders: self.binders.iter().chain(&other.binders).cloned().collect(),
            tests: self.tests.iter().chain(&other.tests).cloned().collect(),
            entries,
            tvars: self.tvars.iter().chain(&other.tvars).cloned().collect(),
        }
    }

    fn mentions(&self, u: &str) -> bool {
        self.tests.iter().any(|p| p.mentions(u)) || self.entries.values().any(|p| p.mentions(u))
    }

    fn subst(&mut self, u: &str, value: &Poly) {
        for p in &mut self.tests {
            *p = p.subst(u, value);
        }
        for p in self.entries.values_mut() {
            *p = p.subst(u, value);
        }
    }

    fn to_term(&self) -> Tuplix {
        let mut parts: Vec<Tuplix> = Vec::new();
        parts.extend(self.tests.iter().map(|p| Tuplix::Test(p.to_term())));
        parts.extend(
            self.entries
                .iter()
                .map(|(a, p)| Tuplix::Entry(a.clone(), p.to_term())),
        );
        parts.extend(self.tvars.iter().map(|x| Tuplix::Var(x.clone())));
        let body = Tuplix::conj_all(parts);
        self.binders
            .iter()
            .rev()
            .fold(body, |acc, u| Tuplix::sum(u.clone(), acc))
    }
}

struct Ctx {
    claimed: BTreeSet<String>,
    avoid: BTreeSet<String>,
    steps: Vec<Step>,
}

impl Ctx {
    fn step(&mut self, rule: &'static str, detail: impl Into<String>) {
        self.steps.push(Step {
            rule,
            detail: detail.into(),
        });
    }
}

fn attrs_text(set: &AttrSet) -> String {
    let names: Vec<&str> = set.iter().map(|a| a.name()).collect();
    format!("{{{}}}", names.join(", "))
}

fn prenex(t: &Tuplix, ctx: &mut Ctx) -> Result<Vec<Alt>, ElimError> {
    Ok(match t {
        Tuplix::Empty => vec![Alt::empty()],
        Tuplix::Null => vec![],
        Tuplix::Entry(a, p) => {
            let mut alt = Alt::empty();
            alt.entries.insert(a.clone(), p.normalize());
            vec![alt]
        }
        Tuplix::Test(p) => {
            let mut alt = Alt::empty();
            alt.tests.push(p.normalize());
            vec![alt]
        }
        Tuplix::Var(x) => {
            let mut alt = Alt::empty();
            alt.tvars.push(x.clone());
            vec![alt]
        }
        Tuplix::Choice(a, b) => {
            let mut out = prenex(a, ctx)?;
            out.extend(prenex(b, ctx)?);
            out
        }
        Tuplix::Conj(a, b) => {
            let left = prenex(a, ctx)?;
            let right = prenex(b, ctx)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    for (attr, _) in l.entries.iter().filter(|(a, _)| r.entries.contains_key(*a)) {
                        ctx.step("T5", format!("merge {} entries", attr));
                    }
                    out.push(l.conj(r));
                }
            }
            out
        }
        Tuplix::Sum(u, body) => {
            let (name, body) = if ctx.claimed.contains(u) {
                let w = fresh_name(u, &ctx.avoid);
                ctx.step("S2", format!("rename bound {} to {}", u, w));
                let renamed = body.subst_data(u, &DataTerm::var(w.clone()));
                (w, renamed)
            } else {
                (u.clone(), (**body).clone())
            };
            ctx.claimed.insert(name.clone());
            ctx.avoid.insert(name.clone());
            let mut alts = prenex(&body, ctx)?;
            if alts.len() > 1 {
                ctx.step("S4", format!("distribute sum over {} over choice", name));
            }
            for alt in &mut alts {
                alt.binders.insert(0, name.clone());
            }
            alts
        }
        Tuplix::Scalar(p, body) => {
            let k = p.normalize();
            let mut alts = prenex(body, ctx)?;
            for alt in &mut alts {
                if let Some(x) = alt.tvars.first() {
                    return Err(ElimError::ScalarOverTuplixVariable(x.clone()));
                }
                for q in alt.entries.values_mut() {
                    *q = k.mul(q);
                }
            }
            ctx.step("Sc4", format!("scale entries by {}", p));
            alts
        }
        Tuplix::Clear(set, body) => {
            let mut alts = prenex(body, ctx)?;
            for alt in &mut alts {
                if let Some(x) = alt.tvars.first() {
                    return Err(ElimError::ClearOverTuplixVariable(x.clone()));
                }
                alt.entries.retain(|a, _| !set.contains(a));
            }
            ctx.step("Cl4", format!("clear {}", attrs_text(set)));
            alts
        }
        Tuplix::Encap(set, body) => {
            let mut alts = prenex(body, ctx)?;
            for alt in &mut alts {
                if let Some(x) = alt.tvars.first() {
                    return Err(ElimError::EncapOverTuplixVariable(x.clone()));
                }
                for a in set {
                    if let Some(p) = alt.entries.remove(a) {
                        ctx.step("E4", format!("encapsulate {}({}) as test({})", a, p, p));
                        alt.tests.push(p);
                    }
                }
            }
            alts
        }
    })
}

/// Divisors of a nonnegative integer small enough for trial division.
fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    Some(out)
}

fn horner(coeffs: &[Quantity], x: &Quantity) -> Quantity {
    coeffs
        .iter()
        .rev()
        .fold(Quantity::zero(), |acc, c| acc.mul(x).add(c))
}

/// Divides by `(u - r)`; `r` must be a root.
fn deflate(coeffs: &[Quantity], r: &Quantity) -> Vec<Quantity> {
    let n = coeffs.len() - 1;
    let mut out = vec![Quantity::zero(); n];
    let mut carry = Quantity::zero();
    for k in (0..n).rev() {
        carry = coeffs[k + 1].add(&carry.mul(r));
        out[k] = carry.clone();
    }
    out
}

/// Distinct rational roots (ascending) of the polynomial with the given
/// ascending coefficients, and the cofactor left after dividing them out
/// with multiplicity.
pub fn rational_roots(coeffs: &[Quantity]) -> (Vec<Quantity>, Vec<Quantity>) {
    let mut cur: Vec<Quantity> = coeffs.to_vec();
    while cur.last().map(|c| c.is_zero()).unwrap_or(false) {
        cur.pop();
    }
    let mut roots: BTreeSet<Quantity> = BTreeSet::new();
    while cur.len() > 1 && cur[0].is_zero() {
        roots.insert(Quantity::zero());
        cur.remove(0);
    }
    if cur.len() <= 1 {
        return (roots.into_iter().collect(), cur);
    }
    let lcm = cur
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = cur
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    let (Some(ps), Some(qs)) = (divisors(&ints[0]), divisors(ints.last().unwrap())) else {
        return (roots.into_iter().collect(), cur);
    };
    let mut candidates: BTreeSet<Quantity> = BTreeSet::new();
    for p in &ps {
        for q in &qs {
            let c = Quantity::from_big_ratio(BigInt::from(*p), BigInt::from(*q));
            candidates.insert(c.neg());
            candidates.insert(c);
        }
    }
    for r in candidates {
        while cur.len() > 1 && horner(&cur, &r).is_zero() {
            cur = deflate(&cur, &r);
            roots.insert(r.clone());
        }
    }
    debug_assert!(!ints.iter().all(Zero::is_zero));
    (roots.into_iter().collect(), cur)
}

fn poly_from_coeffs(u: &str, coeffs: &[Quantity]) -> Poly {
    let x = Poly::var(u);
    coeffs
        .iter()
        .enumerate()
        .fold(Poly::zero(), |acc, (k, c)| acc.add(&x.pow(k as u32).scale(c)))
}

/// True when `p` is `1 - q/q` for some `q` affine in `u`.
fn is_negated_affine(p: &Poly, u: &str) -> bool {
    for (m, _) in p.terms() {
        for (a, _) in m.atoms() {
            if let Atom::Inv(q) = a {
                if q.linear_in(u).is_some() {
                    let ind = q.mul(&q.inv());
                    if *p == Poly::one().sub(&ind) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

enum Progress {
    Done(Alt),
    Dropped,
    Split(Vec<Alt>),
}

fn solve_alt(mut alt: Alt, ctx: &mut Ctx) -> Progress {
    'again: loop {
        // Closed tests are decided outright.
        let mut kept = Vec::with_capacity(alt.tests.len());
        for p in std::mem::take(&mut alt.tests) {
            match p.as_constant() {
                Some(c) if c.is_zero() => {}
                Some(c) => {
                    ctx.step("T8", format!("test({}) fails; alternative dropped", c));
                    return Progress::Dropped;
                }
                None => kept.push(p),
            }
        }
        alt.tests = kept;

        let unused: Vec<String> = alt
            .binders
            .iter()
            .filter(|u| !alt.mentions(u))
            .cloned()
            .collect();
        for u in &unused {
            ctx.step("S1", format!("drop unused binder {}", u));
        }
        alt.binders.retain(|u| !unused.contains(u));

        for bi in 0..alt.binders.len() {
            let u = alt.binders[bi].clone();
            for ti in 0..alt.tests.len() {
                if let Some((c, rest)) = alt.tests[ti].linear_in(&u) {
                    let value = rest.scale(&c.inv()).neg();
                    ctx.step(
                        "S-let",
                        format!("test({}) binds {} := {}", alt.tests[ti], u, value),
                    );
                    alt.tests.remove(ti);
                    alt.binders.remove(bi);
                    alt.subst(&u, &value);
                    continue 'again;
                }
            }
        }

        for bi in 0..alt.binders.len() {
            let u = alt.binders[bi].clone();
            for ti in 0..alt.tests.len() {
                let Some(coeffs) = alt.tests[ti].univariate(&u) else {
                    continue;
                };
                if coeffs.len() < 3 {
                    continue;
                }
                let (roots, rest) = rational_roots(&coeffs);
                if roots.is_empty() {
                    continue;
                }
                let shown: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
                ctx.step(
                    "C6",
                    format!("split test({}) at {} = {}", alt.tests[ti], u, shown.join(", ")),
                );
                let mut out = Vec::new();
                for r in &roots {
                    let mut a = alt.clone();
                    a.tests[ti] = Poly::var(u.clone()).sub(&Poly::constant(r.clone()));
                    out.push(a);
                }
                if rest.len() > 1 {
                    let mut a = alt.clone();
                    a.tests[ti] = poly_from_coeffs(&u, &rest);
                    out.push(a);
                }
                return Progress::Split(out);
            }
        }

        for bi in 0..alt.binders.len() {
            let u = alt.binders[bi].clone();
            if alt.entries.values().any(|p| p.mentions(&u)) {
                continue;
            }
            let hits: Vec<usize> = (0..alt.tests.len())
                .filter(|&i| alt.tests[i].mentions(&u))
                .collect();
            if hits.len() == 1 && is_negated_affine(&alt.tests[hits[0]], &u) {
                ctx.step("S6", format!("sum over {} of a negated test is eps", u));
                alt.tests.remove(hits[0]);
                alt.binders.remove(bi);
                continue 'again;
            }
        }
        return Progress::Done(alt);
    }
}

fn run(t: &Tuplix) -> Result<EliminationReport, ElimError> {
    let mut ctx = Ctx {
        claimed: t.free_data_vars(),
        avoid: t.all_data_vars(),
        steps: Vec::new(),
    };
    let mut work: Vec<Alt> = prenex(t, &mut ctx)?;
    work.reverse();
    let mut done = Vec::new();
    while let Some(alt) = work.pop() {
        match solve_alt(alt, &mut ctx) {
            Progress::Done(a) => done.push(a),
            Progress::Dropped => {}
            Progress::Split(mut alts) => {
                alts.reverse();
                work.extend(alts);
            }
        }
    }
    let residual = done.iter().any(|a| !a.binders.is_empty());
    let result = Tuplix::choice_all(done.iter().map(Alt::to_term));
    Ok(EliminationReport {
        result,
        steps: ctx.steps,
        residual,
    })
}

/// Eliminates every summation, scalar multiplication, clearing and
/// encapsulation node. Unless `residual` is set the result lies in the
/// basic fragment.
pub fn eliminate_all(t: &Tuplix) -> Result<EliminationReport, ElimError> {
    run(t)
}

/// Eliminates summation binders, solving them from their tests.
pub fn elim_sum(t: &Tuplix) -> Result<EliminationReport, ElimError> {
    run(t)
}

/// `∂_H(t)` with the encapsulation and any summation below it removed.
pub fn elim_encap(set: &AttrSet, t: &Tuplix) -> Result<Tuplix, ElimError> {
    Ok(run(&Tuplix::encap(set.clone(), t.clone()))?.result)
}

/// Pushes `p·` down to the entries.
pub fn elim_scalar(p: &DataTerm, t: &Tuplix) -> Result<Tuplix, ElimError> {
    Ok(match t {
        Tuplix::Empty | Tuplix::Null | Tuplix::Test(_) => t.clone(),
        Tuplix::Entry(a, q) => Tuplix::Entry(
            a.clone(),
            DataTerm::mul(p.clone(), q.clone()).normalize().to_term(),
        ),
        Tuplix::Conj(x, y) => Tuplix::conj(elim_scalar(p, x)?, elim_scalar(p, y)?),
        Tuplix::Choice(x, y) => Tuplix::choice(elim_scalar(p, x)?, elim_scalar(p, y)?),
        Tuplix::Sum(v, body) => {
            if p.mentions(v) {
                let mut avoid = p.vars();
                avoid.extend(body.all_data_vars());
                let w = fresh_name(v, &avoid);
                let body = body.subst_data(v, &DataTerm::var(w.clone()));
                Tuplix::sum(w, elim_scalar(p, &body)?)
            } else {
                Tuplix::sum(v.clone(), elim_scalar(p, body)?)
            }
        }
        Tuplix::Scalar(q, body) => elim_scalar(p, &elim_scalar(q, body)?)?,
        Tuplix::Clear(set, body) => elim_scalar(p, &elim_clear(set, body)?)?,
        Tuplix::Encap(set, body) => elim_scalar(p, &elim_encap(set, body)?)?,
        Tuplix::Var(x) => return Err(ElimError::ScalarOverTuplixVariable(x.clone())),
    })
}

/// Removes the entries whose attribute is in `set`.
pub fn elim_clear(set: &AttrSet, t: &Tuplix) -> Result<Tuplix, ElimError> {
    Ok(match t {
        Tuplix::Empty | Tuplix::Null | Tuplix::Test(_) => t.clone(),
        Tuplix::Entry(a, _) if set.contains(a) => Tuplix::Empty,
        Tuplix::Entry(..) => t.clone(),
        Tuplix::Conj(x, y) => Tuplix::conj(elim_clear(set, x)?, elim_clear(set, y)?),
        Tuplix::Choice(x, y) => Tuplix::choice(elim_clear(set, x)?, elim_clear(set, y)?),
        Tuplix::Sum(v, body) => Tuplix::sum(v.clone(), elim_clear(set, body)?),
        Tuplix::Scalar(q, body) => elim_clear(set, &elim_scalar(q, body)?)?,
        Tuplix::Clear(inner, body) => elim_clear(set, &elim_clear(inner, body)?)?,
        Tuplix::Encap(inner, body) => elim_clear(set, &elim_encap(inner, body)?)?,
        Tuplix::Var(x) => return Err(ElimError::ClearOverTuplixVariable(x.clone())),
    })
}

/// `let u = p in t`, i.e. `Σ_u(t ⊗ ζ(u - p))`. If `u` occurs in `p` the
/// binder is renamed first.
pub fn expand_let(u: &str, p: &DataTerm, t: &Tuplix) -> Tuplix {
    if p.mentions(u) {
        let mut avoid = p.vars();
        avoid.extend(t.all_data_vars());
        let w = fresh_name(u, &avoid);
        let body = t.subst_data(u, &DataTerm::var(w.clone()));
        return Tuplix::sum(
            w.clone(),
            Tuplix::conj(body, Tuplix::test(DataTerm::sub(DataTerm::var(w), p.clone()))),
        );
    }
    Tuplix::sum(
        u,
        Tuplix::conj(
            t.clone(),
            Tuplix::test(DataTerm::sub(DataTerm::var(u), p.clone())),
        ),
    )
}
