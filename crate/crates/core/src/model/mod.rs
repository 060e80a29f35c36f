//! The standard model: closed terms denote finite sets of partial functions
//! from attributes to quantities.

mod gen;
mod selftest;

pub use gen::{axiom_rewrite, gen_term, Allow, GenParams, Generator};
pub use selftest::{axiom_names, axiom_selftest, AxiomResult, SelftestReport};

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::dataterm::{DataError, Env, SamplePool};
use crate::eliminate::{eliminate_all, ElimError};
use crate::meadow::Quantity;
use crate::normalize::Verdict;
use crate::tuplix::{Attribute, Tuplix};

/// A partial function from attributes to quantities. A binding to zero is
/// distinct from no binding.
pub type Alternative = BTreeMap<Attribute, Quantity>;

pub type AlternativeSet = BTreeSet<Alternative>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("summation cannot be evaluated directly; eliminate it first")]
    UnsupportedSummation,
    #[error("free tuplix variable ${0}")]
    FreeTuplixVariable(String),
    #[error("a summation binder could not be eliminated")]
    Residual,
    #[error(transparent)]
    Elim(#[from] ElimError),
}

/// Pointwise sum, where a side that is undefined contributes nothing.
pub fn alt_conj(f: &Alternative, g: &Alternative) -> Alternative {
    let mut out = f.clone();
    for (a, d) in g {
        let v = match out.get(a) {
            Some(prev) => prev.add(d),
            None => d.clone(),
        };
        out.insert(a.clone(), v);
    }
    out
}

fn eval(
    t: &Tuplix,
    env: &Env,
    candidates: Option<&[Quantity]>,
) -> Result<AlternativeSet, ModelError> {
    Ok(match t {
        Tuplix::Empty => [Alternative::new()].into_iter().collect(),
        Tuplix::Null => AlternativeSet::new(),
        Tuplix::Entry(a, p) => {
            let mut f = Alternative::new();
            f.insert(a.clone(), p.eval(env)?);
            [f].into_iter().collect()
        }
        Tuplix::Test(p) => {
            if p.eval(env)?.is_zero() {
                [Alternative::new()].into_iter().collect()
            } else {
                AlternativeSet::new()
            }
        }
        Tuplix::Conj(x, y) => {
            let sx = eval(x, env, candidates)?;
            let sy = eval(y, env, candidates)?;
            let mut out = AlternativeSet::new();
            for f in &sx {
                for g in &sy {
                    out.insert(alt_conj(f, g));
                }
            }
            out
        }
        Tuplix::Choice(x, y) => {
            let mut out = eval(x, env, candidates)?;
            out.extend(eval(y, env, candidates)?);
            out
        }
        Tuplix::Scalar(p, x) => {
            let d = p.eval(env)?;
            eval(x, env, candidates)?
                .into_iter()
                .map(|f| f.into_iter().map(|(a, v)| (a, d.mul(&v))).collect())
                .collect()
        }
        Tuplix::Clear(set, x) => eval(x, env, candidates)?
            .into_iter()
            .map(|f| f.into_iter().filter(|(a, _)| !set.contains(a)).collect())
            .collect(),
        Tuplix::Encap(set, x) => eval(x, env, candidates)?
            .into_iter()
            .filter(|f| {
                set.iter()
                    .all(|a| f.get(a).map(|d| d.is_zero()).unwrap_or(true))
            })
            .map(|f| f.into_iter().filter(|(a, _)| !set.contains(a)).collect())
            .collect(),
        Tuplix::Sum(u, body) => {
            let Some(values) = candidates else {
                return Err(ModelError::UnsupportedSummation);
            };
            let mut out = AlternativeSet::new();
            let mut inner = env.clone();
            for d in values {
                inner.insert(u.clone(), d.clone());
                out.extend(eval(body, &inner, candidates)?);
            }
            out
        }
        Tuplix::Var(x) => return Err(ModelError::FreeTuplixVariable(x.clone())),
    })
}

/// Interprets a term without summation under an assignment of its free
/// data variables.
pub fn evaluate(t: &Tuplix, env: &Env) -> Result<AlternativeSet, ModelError> {
    eval(t, env, None)
}

/// Like [`evaluate`], but a summation ranges over `candidates` only.
///
/// This is exact whenever every value of the bound variable that can
/// contribute an alternative is among the candidates, e.g. when the body
/// carries a test whose roots are all candidates, or when the body does not
/// depend on the bound variable at all.
pub fn evaluate_bounded(
    t: &Tuplix,
    env: &Env,
    candidates: &[Quantity],
) -> Result<AlternativeSet, ModelError> {
    eval(t, env, Some(candidates))
}

/// Eliminates derived operators, then evaluates.
pub fn evaluate_eliminated(t: &Tuplix, env: &Env) -> Result<AlternativeSet, ModelError> {
    let report = eliminate_all(t)?;
    if report.residual {
        return Err(ModelError::Residual);
    }
    evaluate(&report.result, env)
}

/// Semantic equality. Closed terms are compared exactly. Open terms are
/// compared under sampled assignments, so the best possible answer for
/// them is `Unknown`.
pub fn sem_equal(
    s: &Tuplix,
    t: &Tuplix,
    samples: usize,
    seed: u64,
) -> Result<Verdict, ModelError> {
    let rs = eliminate_all(s)?;
    let rt = eliminate_all(t)?;
    if rs.residual || rt.residual {
        return Err(ModelError::Residual);
    }
    for r in [&rs.result, &rt.result] {
        if let Some(x) = r.tuplix_vars().into_iter().next() {
            return Err(ModelError::FreeTuplixVariable(x));
        }
    }
    let mut vars = rs.result.free_data_vars();
    vars.extend(rt.result.free_data_vars());
    if vars.is_empty() {
        let env = Env::new();
        return Ok(if evaluate(&rs.result, &env)? == evaluate(&rt.result, &env)? {
            Verdict::Equal
        } else {
            Verdict::NotEqual(env)
        });
    }
    let mut pool = SamplePool::new(seed);
    for i in 0..samples {
        let env = pool.env(&vars, i, samples);
        if evaluate(&rs.result, &env)? != evaluate(&rt.result, &env)? {
            return Ok(Verdict::NotEqual(env));
        }
    }
    Ok(Verdict::Unknown { samples })
}

pub fn alternatives_json(set: &AlternativeSet) -> Value {
    let alts: Vec<Value> = set
        .iter()
        .map(|f| {
            let entries: serde_json::Map<String, Value> = f
                .iter()
                .map(|(a, d)| (a.name().to_string(), Value::String(d.to_string())))
                .collect();
            json!({ "entries": entries })
        })
        .collect();
    json!({ "alternatives": alts })
}

/// Renders each alternative as a conjunction of entries.
pub fn alternatives_text(set: &AlternativeSet) -> String {
    if set.is_empty() {
        return "delta".to_string();
    }
    set.iter()
        .map(|f| {
            if f.is_empty() {
                "eps".to_string()
            } else {
                f.iter()
                    .map(|(a, d)| format!("{}({})", a, d))
                    .collect::<Vec<_>>()
                    .join(" & ")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}
