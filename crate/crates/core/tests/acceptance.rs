//! One line per acceptance criterion. Exits nonzero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tuplix::cli;
use tuplix::dataterm::{DataTerm, Env, Poly};
use tuplix::dsl::{parse_file, print_file};
use tuplix::eliminate::eliminate_all;
use tuplix::meadow::Quantity;
use tuplix::model::{axiom_names, axiom_rewrite, axiom_selftest, evaluate, gen_term, sem_equal};
use tuplix::model::{Allow, GenParams};
use tuplix::normalize::{to_btc_canonical, Verdict};
use tuplix::tuplix::{Attribute, Tuplix};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");

fn corpus(name: &str) -> String {
    format!("{}/{}", CORPUS, name)
}

fn run(args: &[&str]) -> (u8, String) {
    let mut v = vec!["tuplix"];
    v.extend_from_slice(args);
    cli::run(v)
}

fn q(p: i64, r: i64) -> Quantity {
    Quantity::ratio(p, r)
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Suite {
    failed: usize,
    total: usize,
}

impl Suite {
    fn run(&mut self, id: &str, title: &str, f: impl FnOnce() -> Check) {
        self.total += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".to_string());
                Err(format!("panicked: {}", msg))
            });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("[PASS] {:<3} {} ({}; {} ms)", id, title, detail, ms),
            Err(why) => {
                self.failed += 1;
                println!("[FAIL] {:<3} {}: {} ({} ms)", id, title, why, ms);
            }
        }
    }
}

/// `normalize` output for a corpus definition, checked against `expect`
/// and against a one second budget.
fn normalizes_to(file: &str, def: &str, expect: &str) -> Result<(), String> {
    let start = Instant::now();
    let (code, out) = run(&["normalize", &corpus(file), "--def", def]);
    let took = start.elapsed();
    ensure(code == 0, || format!("{}: exit {} ({})", def, code, out.trim()))?;
    ensure(out.trim() == expect, || format!("{}: got `{}`, want `{}`", def, out.trim(), expect))?;
    ensure(took < Duration::from_secs(1), || format!("{}: took {:?}", def, took))
}

fn criterion_1a() -> Check {
    normalizes_to("summation.tpx", "Roots", "a(-1) + a(1)")?;
    Ok("sum u . (a(u) & test(u^2 - 1)) gives a(-1) + a(1)".into())
}

fn criterion_1b() -> Check {
    normalizes_to("encapsulation.tpx", "Acc", "a(-3) & c(3)")?;
    normalizes_to("encapsulation.tpx", "Both", "eps")?;
    Ok("a(-3) & c(3) and eps".into())
}

fn criterion_1c() -> Check {
    normalizes_to("encapsulation.tpx", "Hidden", "b(1) & c(1)")?;
    normalizes_to("encapsulation.tpx", "Inside", "b(1/2)")?;
    normalizes_to("encapsulation.tpx", "Mixed", "b(50) & c(-250)")?;
    Ok("b(1) & c(1), b(1/2), b(50) & c(-250)".into())
}

fn criterion_2() -> Check {
    let text = std::fs::read_to_string(corpus("modular.tpx")).map_err(|e| e.to_string())?;
    let file = parse_file(&text).map_err(|e| e.to_string())?;
    let canon = |name: &str| -> Result<_, String> {
        let report = eliminate_all(file.get(name).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ensure(!report.residual, || format!("{} left a binder", name))?;
        to_btc_canonical(&report.result).map_err(|e| e.to_string())
    };
    let b = canon("B")?;
    let b_let = canon("B_let")?;
    ensure(b == b_let, || format!("B = {} but let form = {}", b, b_let))?;

    // The expected entries, built directly as polynomials.
    let v = DataTerm::var;
    let u0 = DataTerm::add(
        DataTerm::mul(v("reward_1"), DataTerm::add(v("n_11"), v("n_21"))),
        DataTerm::mul(v("reward_2"), DataTerm::add(v("n_12"), v("n_22"))),
    );
    let quarter = DataTerm::div(u0.clone(), DataTerm::int(4)).normalize();
    let mut want: BTreeMap<Attribute, Poly> = BTreeMap::new();
    want.insert(Attribute::new("c"), DataTerm::mul(v("k"), u0).normalize());
    for a in ["js_1", "ss_1", "js_2", "ss_2"] {
        want.insert(Attribute::new(a), quarter.clone());
    }
    ensure(b.alternatives().len() == 1, || format!("{} alternatives", b.alternatives().len()))?;
    let alt = b.alternatives().iter().next().unwrap();
    ensure(alt.tests().is_empty(), || format!("leftover test in {}", alt))?;
    ensure(alt.entries() == &want, || format!("entries differ: {}", alt))?;

    let (code, out) = run(&[
        "eval",
        &corpus("modular.tpx"),
        "--def",
        "B",
        "--bind",
        "reward_1=10",
        "--bind",
        "reward_2=20",
        "--bind",
        "n_11=3",
        "--bind",
        "n_21=2",
        "--bind",
        "n_12=1",
        "--bind",
        "n_22=4",
        "--bind",
        "k=1/5",
    ]);
    ensure(code == 0, || out.clone())?;
    let u0 = 10 * (3 + 2) + 20 * (1 + 4);
    let staff = q(u0, 4).to_string();
    let c = q(u0, 5).to_string();
    let expect = format!(
        r#"{{"alternatives":[{{"entries":{{"c":"{c}","js_1":"{s}","js_2":"{s}","ss_1":"{s}","ss_2":"{s}"}}}}]}}"#,
        c = c,
        s = staff
    );
    ensure(out.trim() == expect, || format!("eval gave {}", out.trim()))?;
    Ok(format!("entries k*u0 and u0/4; concrete c({}) and staff {}", c, staff))
}

fn criterion_3() -> Check {
    let (code, out) = run(&["eval", &corpus("incremental.tpx"), "--def", "B2008'", "--bind", "i=5"]);
    ensure(code == 0, || out.clone())?;
    let factor = q(21, 20);
    let b2007 = [("a_A", 32), ("a_B", 32), ("b_A", 21), ("b_B", 28), ("c_A", -116)];
    let entries: Vec<String> = b2007
        .iter()
        .map(|(a, n)| format!(r#""{}":"{}""#, a, factor.mul(&Quantity::from_int(*n))))
        .collect();
    let expect = format!(r#"{{"alternatives":[{{"entries":{{{}}}}}]}}"#, entries.join(","));
    ensure(out.trim() == expect, || format!("got {}", out.trim()))?;
    ensure(
        expect.contains(r#""a_A":"168/5""#) && expect.contains(r#""b_A":"441/20""#),
        || "oracle drifted".into(),
    )?;

    let (code, out) = run(&[
        "equal",
        &corpus("incremental.tpx"),
        "--def",
        "B2008'''",
        "--def",
        "Average",
    ]);
    ensure(code == 0 && out.starts_with("equal"), || format!("exit {}: {}", code, out.trim()))?;

    let text = std::fs::read_to_string(corpus("incremental.tpx")).map_err(|e| e.to_string())?;
    let file = parse_file(&text).map_err(|e| e.to_string())?;
    let s = eliminate_all(file.get("B2008'''").unwrap()).unwrap().result;
    let t = eliminate_all(file.get("Average").unwrap()).unwrap().result;
    for i in -20..=20 {
        let env: Env = [("i".to_string(), q(i, 3))].into_iter().collect();
        ensure(evaluate(&s, &env).unwrap() == evaluate(&t, &env).unwrap(), || {
            format!("differ at i = {}/3", i)
        })?;
    }
    Ok("B2008' at i=5 matches 21/20 of B2007; B2008''' equal to the average".into())
}

const REQUIRED_AXIOMS: &[&str] = &[
    "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9", "T10", "C1", "C2", "C3", "C4", "C5",
    "C6", "Sc1", "Sc2", "Sc3", "Sc4", "Sc5", "Sc6", "Sc7", "Cl1", "Cl2", "Cl3", "Cl4", "Cl5",
    "Cl6", "Cl7", "E1", "E2", "E3", "E4", "E5", "E6", "E7", "S1", "S2", "S3", "S4", "S5", "S6",
    "or-not", "and-not", "or-eps", "and-delta",
];

fn criterion_4() -> Check {
    let names = axiom_names();
    for r in REQUIRED_AXIOMS {
        ensure(names.contains(r), || format!("{} is not checked", r))?;
    }
    let report = axiom_selftest(500, 2024);
    for r in &report.results {
        ensure(r.samples >= 500, || format!("{}: only {} samples", r.name, r.samples))?;
        ensure(r.failures == 0, || {
            format!("{}: {} failures, e.g. {}", r.name, r.failures, r.first_witness.clone().unwrap_or_default())
        })?;
    }
    Ok(format!("{} axioms x 500 instances, 0 failures", report.results.len()))
}

/// Changes one leaf so that the result may or may not be equal.
fn mutate(t: &Tuplix, rng: &mut ChaCha8Rng) -> Tuplix {
    match t {
        Tuplix::Conj(x, y) if rng.gen_bool(0.5) => Tuplix::conj(mutate(x, rng), (**y).clone()),
        Tuplix::Conj(x, y) => Tuplix::conj((**x).clone(), mutate(y, rng)),
        Tuplix::Choice(x, y) if rng.gen_bool(0.5) => Tuplix::choice(mutate(x, rng), (**y).clone()),
        Tuplix::Choice(x, y) => Tuplix::choice((**x).clone(), mutate(y, rng)),
        Tuplix::Entry(a, p) => Tuplix::entry(a.clone(), DataTerm::add(p.clone(), DataTerm::int(rng.gen_range(-1..=1)))),
        Tuplix::Test(p) => Tuplix::test(DataTerm::mul(p.clone(), DataTerm::int(rng.gen_range(0..=2)))),
        Tuplix::Empty => Tuplix::entry("a", DataTerm::zero()),
        _ => Tuplix::Empty,
    }
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut equal, mut forced) = (0, 0);
    for k in 0..1000u64 {
        let params = GenParams::new(3, Allow::btc());
        let s = gen_term(params.clone(), 10_000 + k);
        let t = match k % 3 {
            0 => {
                forced += 1;
                axiom_rewrite(&s, 1 + (k % 5) as usize, k)
            }
            1 => mutate(&s, &mut rng),
            _ => gen_term(params, 20_000 + k),
        };
        let sem = sem_equal(&s, &t, 1, 0).map_err(|e| e.to_string())?;
        let cs = to_btc_canonical(&s).map_err(|e| e.to_string())?;
        let ct = to_btc_canonical(&t).map_err(|e| e.to_string())?;
        let canon = cs == ct;
        match sem {
            Verdict::Equal => equal += 1,
            Verdict::NotEqual(_) => {}
            Verdict::Unknown { .. } => return Err(format!("closed pair gave Unknown: {} vs {}", s, t)),
        }
        ensure(sem.is_equal() == canon, || {
            format!("disagree on {} vs {} (model {:?}, canonical {})", s, t, sem, canon)
        })?;
    }
    ensure(equal > forced, || format!("only {} equal pairs", equal))?;
    Ok(format!("1000 pairs, {} equal ({} forced), full agreement", equal, forced))
}

fn random_q(rng: &mut ChaCha8Rng) -> Quantity {
    if rng.gen_bool(0.2) {
        Quantity::zero()
    } else {
        q(rng.gen_range(-60..=60), rng.gen_range(1..=24))
    }
}

/// Independent arithmetic on `Ratio<i128>`, with the zero case of the
/// inverse written out.
fn oracle(x: &Quantity) -> Ratio<i128> {
    let n: i128 = x.numer().to_string().parse().unwrap();
    let d: i128 = x.denom().to_string().parse().unwrap();
    Ratio::new(n, d)
}

fn oracle_inv(x: Ratio<i128>) -> Ratio<i128> {
    if x.is_zero() {
        Ratio::zero()
    } else {
        x.recip()
    }
}

fn criterion_6() -> Check {
    type Law = (&'static str, fn(&Quantity, &Quantity, &Quantity) -> bool);
    let laws: Vec<Law> = vec![
        ("(u+v)+w = u+(v+w)", |u, v, w| u.add(v).add(w) == u.add(&v.add(w))),
        ("u+v = v+u", |u, v, _| u.add(v) == v.add(u)),
        ("u+0 = u", |u, _, _| &u.add(&Quantity::zero()) == u),
        ("u+(-u) = 0", |u, _, _| u.add(&u.neg()).is_zero()),
        ("(uv)w = u(vw)", |u, v, w| u.mul(v).mul(w) == u.mul(&v.mul(w))),
        ("uv = vu", |u, v, _| u.mul(v) == v.mul(u)),
        ("1u = u", |u, _, _| &Quantity::one().mul(u) == u),
        ("u(v+w) = uv+uw", |u, v, w| u.mul(&v.add(w)) == u.mul(v).add(&u.mul(w))),
        ("inv(inv u) = u", |u, _, _| &u.inv().inv() == u),
        ("u(u inv u) = u", |u, _, _| &u.mul(&u.mul(&u.inv())) == u),
        ("cancellation", |u, v, w| u.is_zero() || u.mul(v) != u.mul(w) || v == w),
        ("general inverse law", |u, _, _| u.is_zero() || u.mul(&u.inv()).is_one()),
        ("inv 0 = 0", |_, _, _| Quantity::zero().inv().is_zero()),
        ("inv(-u) = -(inv u)", |u, _, _| u.neg().inv() == u.inv().neg()),
        ("inv(uv) = inv u inv v", |u, v, _| u.mul(v).inv() == u.inv().mul(&v.inv())),
        ("0u = 0", |u, _, _| Quantity::zero().mul(u).is_zero()),
        ("u(-v) = -(uv)", |u, v, _| u.mul(&v.neg()) == u.mul(v).neg()),
        ("-(-u) = u", |u, _, _| &u.neg().neg() == u),
    ];
    ensure(Quantity::zero().inv() == Quantity::zero(), || "inv(0) != 0".into())?;
    ensure(Quantity::zero() != Quantity::one(), || "0 = 1".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cancel_hits = 0;
    for (name, law) in &laws {
        for _ in 0..1000 {
            let (u, v) = (random_q(&mut rng), random_q(&mut rng));
            // Make the cancellation premise hold half of the time.
            let w = if rng.gen_bool(0.5) { v.clone() } else { random_q(&mut rng) };
            if *name == "cancellation" && !u.is_zero() && u.mul(&v) == u.mul(&w) {
                cancel_hits += 1;
            }
            ensure(law(&u, &v, &w), || format!("{} fails at u={}, v={}, w={}", name, u, v, w))?;
        }
    }
    ensure(cancel_hits > 100, || format!("cancellation premise held only {} times", cancel_hits))?;
    for _ in 0..1000 {
        let (u, v) = (random_q(&mut rng), random_q(&mut rng));
        let (ou, ov) = (oracle(&u), oracle(&v));
        ensure(oracle(&u.add(&v)) == ou + ov, || format!("{} + {}", u, v))?;
        ensure(oracle(&u.mul(&v)) == ou * ov, || format!("{} * {}", u, v))?;
        ensure(oracle(&u.inv()) == oracle_inv(ou), || format!("inv {}", u))?;
        ensure(oracle(&u.neg()) == -ou, || format!("-{}", u))?;
    }
    ensure(oracle_inv(Ratio::one()) == Ratio::one(), || "oracle".into())?;
    Ok(format!("{} laws x 1000 instances; arithmetic matches a Ratio<i128> oracle", laws.len()))
}

fn criterion_7() -> Check {
    let mut files = 0;
    let mut defs = 0;
    let mut entries: Vec<_> = std::fs::read_dir(CORPUS)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "tpx").unwrap_or(false))
        .collect();
    entries.sort();
    for path in entries {
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let first = parse_file(&text).map_err(|e| format!("{}: {}", path.display(), e))?;
        let printed = print_file(&first);
        let second = parse_file(&printed).map_err(|e| format!("{}: reparse: {}", path.display(), e))?;
        ensure(first == second, || format!("{}: round trip changed the terms", path.display()))?;
        ensure(print_file(&second) == printed, || format!("{}: printing is not stable", path.display()))?;
        files += 1;
        defs += first.defs.len();
    }
    ensure(files >= 4, || format!("only {} corpus files", files))?;
    Ok(format!("{} files, {} definitions", files, defs))
}

fn main() {
    let mut suite = Suite { failed: 0, total: 0 };
    suite.run("1a", "summation example", criterion_1a);
    suite.run("1b", "encapsulation of accumulated entries", criterion_1b);
    suite.run("1c", "encapsulation with hidden variables", criterion_1c);
    suite.run("2", "modular budget", criterion_2);
    suite.run("3", "incremental budgeting", criterion_3);
    suite.run("4", "axiom soundness selftest", criterion_4);
    suite.run("5", "closed BTC completeness correspondence", criterion_5);
    suite.run("6", "meadow laws", criterion_6);
    suite.run("7", "parser round trip on the corpus", criterion_7);
    println!("{} of {} criteria passed", suite.total - suite.failed, suite.total);
    if suite.failed > 0 {
        std::process::exit(1);
    }
}
