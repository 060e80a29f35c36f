//! Checks every axiom instance against the standard model.
//!
//! Metavariables are instantiated with random closed terms. Both sides are
//! evaluated with bounded summation, and each side is also run through the
//! eliminator and evaluated without summation; all three values must agree.

use rand::Rng;
use serde_json::{json, Value};

use super::gen::{Allow, GenParams, Generator};
use super::{evaluate_bounded, evaluate_eliminated, AlternativeSet, ModelError};
use crate::dataterm::{DataTerm, Env};
use crate::meadow::Quantity;
use crate::tuplix::Tuplix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomResult {
    pub name: &'static str,
    pub samples: usize,
    /// Instances whose sides denote a nonempty set.
    pub nonempty: usize,
    pub failures: usize,
    pub first_witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub seed: u64,
    pub results: Vec<AxiomResult>,
}

impl SelftestReport {
    pub fn total_failures(&self) -> usize {
        self.results.iter().map(|r| r.failures).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<10} {:>8} {:>9} {:>9}\n",
            "axiom", "samples", "nonempty", "failures"
        );
        for r in &self.results {
            out.push_str(&format!(
                "{:<10} {:>8} {:>9} {:>9}\n",
                r.name, r.samples, r.nonempty, r.failures
            ));
            if let Some(w) = &r.first_witness {
                out.push_str(&format!("  witness: {}\n", w));
            }
        }
        out.push_str(&format!("total failures: {}\n", self.total_failures()));
        out
    }

    pub fn to_json(&self) -> Value {
        let axioms: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "samples": r.samples,
                    "nonempty": r.nonempty,
                    "failures": r.failures,
                    "first_witness": r.first_witness,
                })
            })
            .collect();
        json!({
            "seed": self.seed,
            "total_failures": self.total_failures(),
            "axioms": axioms,
        })
    }
}

/// A pair of sides plus candidate values needed beyond the constant pool.
struct Instance {
    lhs: Tuplix,
    rhs: Tuplix,
    extra: Vec<DataTerm>,
}

fn inst(lhs: Tuplix, rhs: Tuplix) -> Instance {
    Instance {
        lhs,
        rhs,
        extra: Vec::new(),
    }
}

type Maker = fn(&mut Generator) -> Instance;

fn x(g: &mut Generator) -> Tuplix {
    g.term()
}

fn d(g: &mut Generator) -> DataTerm {
    g.closed_data()
}

/// A closed data term that is zero about half of the time.
fn d0(g: &mut Generator) -> DataTerm {
    if g.rng().gen_bool(0.5) {
        let p = d(g);
        DataTerm::sub(p.clone(), p)
    } else {
        d(g)
    }
}

fn body(g: &mut Generator, u: &str) -> Tuplix {
    g.guarded_body(u, &[], 1)
}

use Tuplix as T;

fn axioms() -> Vec<(&'static str, Maker)> {
    vec![
        ("T1", |g| {
            let (a, b) = (x(g), x(g));
            inst(T::conj(a.clone(), b.clone()), T::conj(b, a))
        }),
        ("T2", |g| {
            let (a, b, c) = (x(g), x(g), x(g));
            inst(
                T::conj(T::conj(a.clone(), b.clone()), c.clone()),
                T::conj(a, T::conj(b, c)),
            )
        }),
        ("T3", |g| {
            let a = x(g);
            inst(T::conj(a.clone(), T::Empty), a)
        }),
        ("T4", |g| inst(T::conj(x(g), T::Null), T::Null)),
        ("T5", |g| {
            let a = g.attribute();
            let (u, v) = (d(g), d(g));
            inst(
                T::conj(T::entry(a.clone(), u.clone()), T::entry(a.clone(), v.clone())),
                T::entry(a, DataTerm::add(u, v)),
            )
        }),
        ("T6", |g| {
            let u = d0(g);
            inst(T::test(u.clone()), T::test(DataTerm::indicator(u)))
        }),
        ("T7", |_| inst(T::test(DataTerm::zero()), T::Empty)),
        ("T8", |_| inst(T::test(DataTerm::one()), T::Null)),
        ("T9", |g| {
            let (u, v) = (d0(g), d0(g));
            inst(
                T::conj(T::test(u.clone()), T::test(v.clone())),
                T::test(DataTerm::add(DataTerm::indicator(u), DataTerm::indicator(v))),
            )
        }),
        ("T10", |g| {
            let a = g.attribute();
            let u = d(g);
            let v = match g.rng().gen_range(0..3) {
                0 => DataTerm::add(u.clone(), DataTerm::zero()),
                1 => DataTerm::mul(DataTerm::one(), u.clone()),
                _ => d(g),
            };
            let t = T::test(DataTerm::sub(u.clone(), v.clone()));
            inst(T::conj(t.clone(), T::entry(a.clone(), u)), T::conj(t, T::entry(a, v)))
        }),
        ("C1", |g| {
            let (a, b) = (x(g), x(g));
            inst(T::choice(a.clone(), b.clone()), T::choice(b, a))
        }),
        ("C2", |g| {
            let (a, b, c) = (x(g), x(g), x(g));
            inst(
                T::choice(T::choice(a.clone(), b.clone()), c.clone()),
                T::choice(a, T::choice(b, c)),
            )
        }),
        ("C3", |g| {
            let a = x(g);
            inst(T::choice(a.clone(), a.clone()), a)
        }),
        ("C4", |g| {
            let a = x(g);
            inst(T::choice(a.clone(), T::Null), a)
        }),
        ("C5", |g| {
            let (a, b, c) = (x(g), x(g), x(g));
            inst(
                T::conj(a.clone(), T::choice(b.clone(), c.clone())),
                T::choice(T::conj(a.clone(), b), T::conj(a, c)),
            )
        }),
        ("C6", |g| {
            let (u, v) = (d0(g), d0(g));
            inst(
                T::choice(T::test(u.clone()), T::test(v.clone())),
                T::test(DataTerm::mul(u, v)),
            )
        }),
        ("Sc1", |g| inst(T::scalar(d(g), T::Empty), T::Empty)),
        ("Sc2", |g| inst(T::scalar(d(g), T::Null), T::Null)),
        ("Sc3", |g| {
            let v = d0(g);
            inst(T::scalar(d(g), T::test(v.clone())), T::test(v))
        }),
        ("Sc4", |g| {
            let a = g.attribute();
            let (u, v) = (d(g), d(g));
            inst(
                T::scalar(u.clone(), T::entry(a.clone(), v.clone())),
                T::entry(a, DataTerm::mul(u, v)),
            )
        }),
        ("Sc5", |g| {
            let (u, a, b) = (d(g), x(g), x(g));
            inst(
                T::scalar(u.clone(), T::conj(a.clone(), b.clone())),
                T::conj(T::scalar(u.clone(), a), T::scalar(u, b)),
            )
        }),
        ("Sc6", |g| {
            let (u, a, b) = (d(g), x(g), x(g));
            inst(
                T::scalar(u.clone(), T::choice(a.clone(), b.clone())),
                T::choice(T::scalar(u.clone(), a), T::scalar(u, b)),
            )
        }),
        ("Sc7", |g| {
            let p = d(g);
            let v = g.binder();
            let t = body(g, &v);
            inst(
                T::scalar(p.clone(), T::sum(v.clone(), t.clone())),
                T::sum(v, T::scalar(p, t)),
            )
        }),
        ("Cl1", |g| inst(T::clear(g.attr_subset(), T::Empty), T::Empty)),
        ("Cl2", |g| inst(T::clear(g.attr_subset(), T::Null), T::Null)),
        ("Cl3", |g| {
            let u = d0(g);
            inst(T::clear(g.attr_subset(), T::test(u.clone())), T::test(u))
        }),
        ("Cl4", |g| {
            let set = g.attr_subset();
            let a = g.attribute();
            let e = T::entry(a.clone(), d(g));
            let rhs = if set.contains(&a) { T::Empty } else { e.clone() };
            inst(T::clear(set, e), rhs)
        }),
        ("Cl5", |g| {
            let (set, a, b) = (g.attr_subset(), x(g), x(g));
            inst(
                T::clear(set.clone(), T::conj(a.clone(), b.clone())),
                T::conj(T::clear(set.clone(), a), T::clear(set, b)),
            )
        }),
        ("Cl6", |g| {
            let (set, a, b) = (g.attr_subset(), x(g), x(g));
            inst(
                T::clear(set.clone(), T::choice(a.clone(), b.clone())),
                T::choice(T::clear(set.clone(), a), T::clear(set, b)),
            )
        }),
        ("Cl7", |g| {
            let set = g.attr_subset();
            let u = g.binder();
            let t = body(g, &u);
            inst(
                T::clear(set.clone(), T::sum(u.clone(), t.clone())),
                T::sum(u, T::clear(set, t)),
            )
        }),
        ("E1", |g| inst(T::encap(g.attr_subset(), T::Empty), T::Empty)),
        ("E2", |g| inst(T::encap(g.attr_subset(), T::Null), T::Null)),
        ("E3", |g| {
            let u = d0(g);
            inst(T::encap(g.attr_subset(), T::test(u.clone())), T::test(u))
        }),
        ("E4", |g| {
            let set = g.attr_subset();
            let a = g.attribute();
            let u = d0(g);
            let e = T::entry(a.clone(), u.clone());
            let rhs = if set.contains(&a) { T::test(u) } else { e.clone() };
            inst(T::encap(set, e), rhs)
        }),
        ("E5", |g| {
            let (set, a, b) = (g.attr_subset(), x(g), x(g));
            inst(
                T::encap(set.clone(), T::conj(a.clone(), T::encap(set.clone(), b.clone()))),
                T::conj(T::encap(set.clone(), a), T::encap(set, b)),
            )
        }),
        ("E6", |g| {
            let (set, a, b) = (g.attr_subset(), x(g), x(g));
            inst(
                T::encap(set.clone(), T::choice(a.clone(), b.clone())),
                T::choice(T::encap(set.clone(), a), T::encap(set, b)),
            )
        }),
        ("E7", |g| {
            let set = g.attr_subset();
            let u = g.binder();
            let t = body(g, &u);
            inst(
                T::encap(set.clone(), T::sum(u.clone(), t.clone())),
                T::sum(u, T::encap(set, t)),
            )
        }),
        ("S1", |g| {
            let u = g.binder();
            let t = x(g);
            inst(T::sum(u, t.clone()), t)
        }),
        ("S2", |g| {
            let u = g.binder();
            let t = body(g, &u);
            let mut v = g.binder();
            while v == u {
                v = g.binder();
            }
            inst(
                T::sum(u.clone(), t.clone()),
                T::sum(v.clone(), t.subst_data(&u, &DataTerm::var(v))),
            )
        }),
        ("S3", |g| {
            let u = g.binder();
            let s = x(g);
            let t = body(g, &u);
            inst(
                T::sum(u.clone(), T::conj(s.clone(), t.clone())),
                T::conj(s, T::sum(u, t)),
            )
        }),
        ("S4", |g| {
            let u = g.binder();
            let (s, t) = (body(g, &u), body(g, &u));
            inst(
                T::sum(u.clone(), T::choice(s.clone(), t.clone())),
                T::choice(T::sum(u.clone(), s), T::sum(u, t)),
            )
        }),
        ("S5", |g| {
            let u = g.binder();
            let p = d(g);
            Instance {
                lhs: T::sum(u.clone(), T::test(DataTerm::sub(DataTerm::var(u), p.clone()))),
                rhs: T::Empty,
                extra: vec![p],
            }
        }),
        ("S6", |g| {
            let u = g.binder();
            let p = d(g);
            Instance {
                lhs: T::sum(u.clone(), T::ntest(DataTerm::sub(DataTerm::var(u), p.clone()))),
                rhs: T::Empty,
                extra: vec![p],
            }
        }),
        ("or-not", |g| {
            let p = d0(g);
            inst(T::choice(T::test(p.clone()), T::ntest(p)), T::Empty)
        }),
        ("and-not", |g| {
            let p = d0(g);
            inst(T::conj(T::test(p.clone()), T::ntest(p)), T::Null)
        }),
        ("or-eps", |g| inst(T::choice(T::test(d0(g)), T::Empty), T::Empty)),
        ("and-delta", |g| inst(T::conj(T::test(d0(g)), T::Null), T::Null)),
    ]
}

/// Names of the checked axioms, in report order.
pub fn axiom_names() -> Vec<&'static str> {
    axioms().into_iter().map(|(n, _)| n).collect()
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns whether the instance denotes a nonempty set.
fn check(instance: &Instance, pool: &[Quantity]) -> Result<bool, String> {
    let env = Env::new();
    let mut candidates = pool.to_vec();
    for p in &instance.extra {
        candidates.push(p.eval(&env).map_err(|e| e.to_string())?);
    }
    let show = |s: &AlternativeSet| super::alternatives_text(s);
    let err = |e: ModelError| e.to_string();
    let l = evaluate_bounded(&instance.lhs, &env, &candidates).map_err(err)?;
    let r = evaluate_bounded(&instance.rhs, &env, &candidates).map_err(err)?;
    if l != r {
        return Err(format!(
            "{}  =  {}  gives {} vs {}",
            instance.lhs,
            instance.rhs,
            show(&l),
            show(&r)
        ));
    }
    for (side, value) in [(&instance.lhs, &l), (&instance.rhs, &r)] {
        let e = evaluate_eliminated(side, &env).map_err(err)?;
        if &e != value {
            return Err(format!(
                "elimination of {} gives {} instead of {}",
                side,
                show(&e),
                show(value)
            ));
        }
    }
    Ok(!l.is_empty())
}

/// Runs `samples` random instances of every axiom. Instance `i` of axiom
/// `k` is generated from its own seed, so a failure can be replayed alone.
pub fn axiom_selftest(samples: usize, seed: u64) -> SelftestReport {
    let params = GenParams::new(2, Allow::all());
    let pool = params.constants.clone();
    let results = axioms()
        .into_iter()
        .enumerate()
        .map(|(k, (name, make))| {
            let mut failures = 0;
            let mut nonempty = 0;
            let mut first_witness = None;
            for i in 0..samples {
                let mut g = Generator::new(params.clone(), mix(seed, k as u64, i as u64));
                let instance = make(&mut g);
                match check(&instance, &pool) {
                    Ok(ne) => nonempty += ne as usize,
                    Err(w) => {
                        failures += 1;
                        first_witness.get_or_insert(w);
                    }
                }
            }
            AxiomResult {
                name,
                samples,
                nonempty,
                failures,
                first_witness,
            }
        })
        .collect();
    SelftestReport { seed, results }
}
