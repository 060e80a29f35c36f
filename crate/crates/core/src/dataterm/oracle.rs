//! Deciding `D ⊨ p = 0` as far as it can be decided cheaply.
//!
//! A zero normal form proves validity. Otherwise the term is evaluated under
//! sampled rational assignments; a nonzero value refutes it with a concrete
//! witness. Anything else is inconclusive.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataTerm, Env};
use crate::meadow::Quantity;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(Env),
    Unknown { samples: usize },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Deterministic source of sample assignments.
///
/// Always includes the points where the totalized inverse is discontinuous:
/// the first assignment is all zeros, and small variable sets are first
/// enumerated exhaustively over `{0, ±1, ±2, ±1/2, ±1/3}`.
pub struct SamplePool {
    rng: ChaCha8Rng,
    fixed: Vec<Quantity>,
}

impl SamplePool {
    pub fn new(seed: u64) -> Self {
        SamplePool {
            rng: ChaCha8Rng::seed_from_u64(seed),
            fixed: SamplePool::fixed_points(),
        }
    }

    pub fn fixed_points() -> Vec<Quantity> {
        let mut v = vec![Quantity::zero()];
        for (n, d) in [(1, 1), (2, 1), (1, 2), (1, 3)] {
            v.push(Quantity::ratio(n, d));
            v.push(Quantity::ratio(-n, d));
        }
        v
    }

    pub fn draw(&mut self) -> Quantity {
        if self.rng.gen_bool(0.55) {
            let i = self.rng.gen_range(0..self.fixed.len());
            self.fixed[i].clone()
        } else {
            let n = self.rng.gen_range(-12i64..=12);
            let d = self.rng.gen_range(1i64..=6);
            Quantity::ratio(n, d)
        }
    }

    /// The `index`-th assignment for `vars` out of a budget of `budget`.
    pub fn env(&mut self, vars: &BTreeSet<String>, index: usize, budget: usize) -> Env {
        let k = self.fixed.len();
        let exhaustive = (k as f64).powi(vars.len() as i32) <= (budget / 2) as f64;
        if exhaustive && index < k.pow(vars.len() as u32) {
            let mut rem = index;
            return vars
                .iter()
                .map(|v| {
                    let q = self.fixed[rem % k].clone();
                    rem /= k;
                    (v.clone(), q)
                })
                .collect();
        }
        if index == 0 {
            return vars.iter().map(|v| (v.clone(), Quantity::zero())).collect();
        }
        vars.iter().map(|v| (v.clone(), self.draw())).collect()
    }
}

/// A single random assignment for `vars`.
pub fn sample_env(vars: &BTreeSet<String>, seed: u64) -> Env {
    let mut pool = SamplePool::new(seed);
    vars.iter().map(|v| (v.clone(), pool.draw())).collect()
}

/// Whether `p` denotes zero under every assignment.
pub fn is_zero(p: &DataTerm, samples: usize, seed: u64) -> Validity {
    let nf = p.normalize();
    if nf.is_zero() {
        return Validity::Valid;
    }
    let vars = p.vars();
    if vars.is_empty() {
        return Validity::Invalid(Env::new());
    }
    let mut pool = SamplePool::new(seed);
    for i in 0..samples {
        let env = pool.env(&vars, i, samples);
        match p.eval(&env) {
            Ok(val) if !val.is_zero() => return Validity::Invalid(env),
            _ => {}
        }
    }
    Validity::Unknown { samples }
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
    fn valid_by_normal_form() {
        let t = DataTerm::sub(DataTerm::add(u(), v()), DataTerm::add(v(), u()));
        assert_eq!(is_zero(&t, 10, 1), Validity::Valid);
    }

    #[test]
    fn invalid_with_witness() {
        let t = DataTerm::sub(u(), DataTerm::one());
        match is_zero(&t, 10, 1) {
            Validity::Invalid(env) => {
                assert_eq!(env["u"], Quantity::zero());
                assert!(!t.eval(&env).unwrap().is_zero());
            }
            other => panic!("expected invalid, got {:?}", other),
        }
    }

    #[test]
    fn closed_nonzero_is_invalid() {
        let t = DataTerm::inv(DataTerm::int(3));
        assert_eq!(is_zero(&t, 10, 1), Validity::Invalid(Env::new()));
    }

    /// Exhaustive oracle over `{-2..2}²` for `(1 - u/u)·(u·v)`.
    #[test]
    fn conditional_identity_never_refuted() {
        let t = DataTerm::mul(
            DataTerm::sub(DataTerm::one(), DataTerm::indicator(u())),
            DataTerm::mul(u(), v()),
        );
        for a in -2..=2 {
            for b in -2..=2 {
                let env: Env = [("u", a), ("v", b)]
                    .iter()
                    .map(|(k, n)| (k.to_string(), Quantity::from_int(*n)))
                    .collect();
                assert!(t.eval(&env).unwrap().is_zero());
            }
        }
        assert!(!matches!(is_zero(&t, 10_000, 7), Validity::Invalid(_)));
    }

    #[test]
    fn sampling_reaches_discontinuity() {
        // u/u - 1 is zero everywhere except u = 0.
        let t = DataTerm::sub(DataTerm::indicator(u()), DataTerm::one());
        match is_zero(&t, 50, 3) {
            Validity::Invalid(env) => assert!(env["u"].is_zero()),
            other => panic!("expected invalid, got {:?}", other),
        }
    }

    #[test]
    fn unknown_for_non_polynomial_identity() {
        // (u+v)/(u+v) - (v+u)/(v+u) normalizes to zero via shared atoms
        let s = DataTerm::add(u(), v());
        let t = DataTerm::sub(DataTerm::indicator(s.clone()), DataTerm::indicator(DataTerm::add(v(), u())));
        assert_eq!(is_zero(&t, 100, 1), Validity::Valid);
        // u/u · v/v - (u·v)/(u·v) holds but needs sampling
        let t = DataTerm::sub(
            DataTerm::mul(DataTerm::indicator(u()), DataTerm::indicator(v())),
            DataTerm::indicator(DataTerm::mul(u(), v())),
        );
        assert!(!matches!(is_zero(&t, 500, 2), Validity::Invalid(_)));
    }

    #[test]
    fn pool_is_deterministic_and_starts_at_zero() {
        let vars: BTreeSet<String> = ["u".to_string(), "v".to_string()].into_iter().collect();
        let mut a = SamplePool::new(9);
        let mut b = SamplePool::new(9);
        for i in 0..200 {
            assert_eq!(a.env(&vars, i, 200), b.env(&vars, i, 200));
        }
        let first = SamplePool::new(1).env(&vars, 0, 2);
        assert!(first.values().all(|q| q.is_zero()));
    }
}
