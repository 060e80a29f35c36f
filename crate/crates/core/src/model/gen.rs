//! Random terms for property checks.
//!
//! Every generated summation is guarded: its body carries a test whose
//! roots in the bound variable all lie in the constant pool. Evaluating
//! with [`evaluate_bounded`](super::evaluate_bounded) over the pool is then
//! exact.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataterm::DataTerm;
use crate::meadow::Quantity;
use crate::tuplix::{AttrSet, Attribute, Tuplix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Allow {
    pub choice: bool,
    pub sum: bool,
    pub scalar: bool,
    pub clear: bool,
    pub encap: bool,
}

impl Allow {
    pub fn all() -> Self {
        Allow {
            choice: true,
            sum: true,
            scalar: true,
            clear: true,
            encap: true,
        }
    }

    pub fn btc() -> Self {
        Allow {
            choice: true,
            ..Allow::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub max_depth: u32,
    pub attributes: Vec<Attribute>,
    /// Always contains 0, 1 and -1.
    pub constants: Vec<Quantity>,
    pub allow: Allow,
    /// Free data variables the generator may mention.
    pub free_vars: Vec<String>,
}

impl GenParams {
    pub fn new(max_depth: u32, allow: Allow) -> Self {
        let constants = [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (3, 1)]
            .iter()
            .map(|&(p, q)| Quantity::ratio(p, q))
            .collect();
        GenParams {
            max_depth,
            attributes: ["a", "b", "c"].iter().map(|a| Attribute::new(*a)).collect(),
            constants,
            allow,
            free_vars: Vec::new(),
        }
    }

    fn ensure_units(&mut self) {
        for c in [Quantity::zero(), Quantity::one(), Quantity::from_int(-1)] {
            if !self.constants.contains(&c) {
                self.constants.push(c);
            }
        }
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
    params: GenParams,
}

const BINDERS: [&str; 3] = ["u", "v", "w"];

impl Generator {
    pub fn new(mut params: GenParams, seed: u64) -> Self {
        params.ensure_units();
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            params,
        }
    }

    pub fn params(&self) -> &GenParams {
        &self.params
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn constant(&mut self) -> Quantity {
        self.params.constants.choose(&mut self.rng).unwrap().clone()
    }

    pub fn attribute(&mut self) -> Attribute {
        self.params.attributes.choose(&mut self.rng).unwrap().clone()
    }

    pub fn attr_subset(&mut self) -> AttrSet {
        let attrs = self.params.attributes.clone();
        attrs.into_iter().filter(|_| self.rng.gen_bool(0.5)).collect()
    }

    /// A data term over `scope` and the free variables.
    pub fn data(&mut self, scope: &[String], depth: u32) -> DataTerm {
        let mut vars: Vec<String> = scope.to_vec();
        vars.extend(self.params.free_vars.iter().cloned());
        if depth == 0 || self.rng.gen_bool(0.4) {
            if !vars.is_empty() && self.rng.gen_bool(0.5) {
                return DataTerm::var(vars.choose(&mut self.rng).unwrap().clone());
            }
            return DataTerm::konst(self.constant());
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 | 1 => DataTerm::add(self.data(scope, d), self.data(scope, d)),
            2 | 3 => DataTerm::mul(self.data(scope, d), self.data(scope, d)),
            4 => DataTerm::neg(self.data(scope, d)),
            _ => DataTerm::inv(self.data(scope, d)),
        }
    }

    pub fn closed_data(&mut self) -> DataTerm {
        let free = std::mem::take(&mut self.params.free_vars);
        let p = self.data(&[], 2);
        self.params.free_vars = free;
        p
    }

    /// A test in `u` whose roots are pool constants: `ζ(k·u - k·c)` or
    /// `ζ((u - c1)·(u - c2))`.
    pub fn guard(&mut self, u: &str) -> Tuplix {
        let uv = DataTerm::var(u);
        if self.rng.gen_bool(0.7) {
            let k = [1, 2, -1, 3][self.rng.gen_range(0..4)];
            let k = DataTerm::int(k);
            let c = DataTerm::konst(self.constant());
            Tuplix::test(DataTerm::sub(
                DataTerm::mul(k.clone(), uv),
                DataTerm::mul(k, c),
            ))
        } else {
            let c1 = DataTerm::konst(self.constant());
            let c2 = DataTerm::konst(self.constant());
            Tuplix::test(DataTerm::mul(
                DataTerm::sub(uv.clone(), c1),
                DataTerm::sub(uv, c2),
            ))
        }
    }

    /// `body ⊗ guard(u)` where `body` may mention `u`.
    pub fn guarded_body(&mut self, u: &str, scope: &[String], depth: u32) -> Tuplix {
        let mut inner = scope.to_vec();
        inner.push(u.to_string());
        let body = self.term_in(&inner, depth);
        let g = self.guard(u);
        if self.rng.gen_bool(0.5) {
            Tuplix::conj(body, g)
        } else {
            Tuplix::conj(g, body)
        }
    }

    pub fn binder(&mut self) -> String {
        BINDERS.choose(&mut self.rng).unwrap().to_string()
    }

    fn leaf(&mut self, scope: &[String]) -> Tuplix {
        match self.rng.gen_range(0..8) {
            0 => Tuplix::Empty,
            1 => Tuplix::Null,
            2 => Tuplix::test(self.data(scope, 1)),
            _ => {
                let a = self.attribute();
                Tuplix::entry(a, self.data(scope, 1))
            }
        }
    }

    fn term_in(&mut self, scope: &[String], depth: u32) -> Tuplix {
        if depth == 0 {
            return self.leaf(scope);
        }
        let allow = self.params.allow;
        let mut options = vec![0, 0, 1];
        if allow.choice {
            options.extend([2, 2]);
        }
        if allow.sum {
            options.push(3);
        }
        if allow.scalar {
            options.push(4);
        }
        if allow.clear {
            options.push(5);
        }
        if allow.encap {
            options.push(6);
        }
        let d = depth - 1;
        match *options.choose(&mut self.rng).unwrap() {
            0 => Tuplix::conj(self.term_in(scope, d), self.term_in(scope, d)),
            1 => self.leaf(scope),
            2 => Tuplix::choice(self.term_in(scope, d), self.term_in(scope, d)),
            3 => {
                let u = self.binder();
                Tuplix::sum(u.clone(), self.guarded_body(&u, scope, d))
            }
            4 => Tuplix::scalar(self.data(scope, 1), self.term_in(scope, d)),
            5 => Tuplix::clear(self.attr_subset(), self.term_in(scope, d)),
            _ => Tuplix::encap(self.attr_subset(), self.term_in(scope, d)),
        }
    }

    pub fn term(&mut self) -> Tuplix {
        let depth = self.params.max_depth;
        self.term_in(&[], depth)
    }

    /// A term that may mention `scope` as free variables.
    pub fn term_over(&mut self, scope: &[String]) -> Tuplix {
        let depth = self.params.max_depth;
        self.term_in(scope, depth)
    }
}

pub fn gen_term(params: GenParams, seed: u64) -> Tuplix {
    Generator::new(params, seed).term()
}

/// Rewrites `t` a few times with randomly chosen axiom instances of the
/// basic fragment, in either direction. The result denotes the same set.
pub fn axiom_rewrite(t: &Tuplix, rounds: usize, seed: u64) -> Tuplix {
    let mut g = Generator::new(GenParams::new(1, Allow::btc()), seed);
    let mut t = t.clone();
    for _ in 0..rounds {
        let n = count_nodes(&t);
        let target = g.rng.gen_range(0..n);
        let mut i = 0;
        t = rewrite_at(&t, target, &mut i, &mut g);
    }
    t
}

fn count_nodes(t: &Tuplix) -> usize {
    match t {
        Tuplix::Conj(x, y) | Tuplix::Choice(x, y) => 1 + count_nodes(x) + count_nodes(y),
        _ => 1,
    }
}

fn rewrite_at(t: &Tuplix, target: usize, i: &mut usize, g: &mut Generator) -> Tuplix {
    let here = *i;
    *i += 1;
    if here == target {
        return rewrite_here(t, g);
    }
    match t {
        Tuplix::Conj(x, y) => {
            let x = rewrite_at(x, target, i, g);
            Tuplix::conj(x, rewrite_at(y, target, i, g))
        }
        Tuplix::Choice(x, y) => {
            let x = rewrite_at(x, target, i, g);
            Tuplix::choice(x, rewrite_at(y, target, i, g))
        }
        _ => t.clone(),
    }
}

fn rewrite_here(t: &Tuplix, g: &mut Generator) -> Tuplix {
    use Tuplix as T;
    let pick = g.rng.gen_range(0..4);
    match (t, pick) {
        (T::Conj(x, y), 0) => T::conj((**y).clone(), (**x).clone()),
        (T::Choice(x, y), 0) => T::choice((**y).clone(), (**x).clone()),
        (T::Conj(x, y), 1) => match &**x {
            T::Conj(a, b) => T::conj((**a).clone(), T::conj((**b).clone(), (**y).clone())),
            _ => T::conj((**y).clone(), (**x).clone()),
        },
        (T::Choice(x, y), 1) => match &**x {
            T::Choice(a, b) => T::choice((**a).clone(), T::choice((**b).clone(), (**y).clone())),
            _ => T::choice((**y).clone(), (**x).clone()),
        },
        (T::Conj(x, y), 2) => match &**y {
            T::Choice(a, b) => T::choice(
                T::conj((**x).clone(), (**a).clone()),
                T::conj((**x).clone(), (**b).clone()),
            ),
            _ => T::conj((**x).clone(), T::conj((**y).clone(), T::Empty)),
        },
        (T::Entry(a, p), 0 | 1) => {
            let c = DataTerm::konst(g.constant());
            T::conj(T::entry(a.clone(), c.clone()), T::entry(a.clone(), DataTerm::sub(p.clone(), c)))
        }
        (T::Entry(a, p), _) => T::entry(a.clone(), DataTerm::add(p.clone(), DataTerm::zero())),
        (T::Test(p), 0) => T::test(DataTerm::indicator(p.clone())),
        (T::Test(p), 1) => T::choice(T::test(p.clone()), T::test(DataTerm::mul(p.clone(), p.clone()))),
        (T::Empty, 0) => T::test(DataTerm::zero()),
        (T::Null, 0) => T::test(DataTerm::one()),
        (T::Null, 1) => {
            let x = g.term();
            T::conj(x, T::Null)
        }
        (_, 3) => T::choice(t.clone(), T::Null),
        (_, 2) => T::choice(t.clone(), t.clone()),
        _ => T::conj(t.clone(), T::Empty),
    }
}
