//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use pavelka::connectives::{apply_connective, certify, eval_term, grid, half_approx, half_target, Builder, ConnectiveTerm, Id};
use pavelka::evaluator::{entails, Evaluator};
use pavelka::io::search_to_json;
use pavelka::scalar::{format_rational, ratio};
use pavelka::structures::{combine, tuples};
use pavelka::syntax::{parse_formula, parse_term, render, Formula, Signature, Theory, TypeSet, Vocabulary};
use pavelka::transforms::{order_theory, relativize_monadic, restrict_to_predicate, thicken, OrderTheorySpec, ThickenOptions};
use pavelka::types::{
    generator_check, omega_principal_check, realizes, search_model, type_distance, CompleteTypeRecord,
    OmegaCandidate, RecordEquivalence, SearchOutcome, SearchSpace,
};
use pavelka::{Rational, Scalar, SmallRational, Structure};
use rand::rngs::StdRng;
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn assignment(env: &HashMap<String, usize>) -> BTreeMap<String, usize> {
    env.iter().map(|(k, v)| (k.clone(), *v)).collect()
}

fn engine(m: &Structure, f: &Formula) -> Rational {
    Evaluator::new(m).sentence(f).expect("well-formed sentence")
}

fn without_p() -> Vocabulary {
    let mut v = test_vocabulary();
    v.predicates.remove("P");
    v
}

fn exact_evaluation() -> Outcome {
    let vocab = test_vocabulary();
    let mut rng = rng(0x5eed_0001);
    let scopes: [Vec<String>; 3] = [vec![], vec!["x".into()], vec!["x".into(), "y".into()]];
    for i in 0..2000 {
        let m = random_structure(&mut rng, &vocab, 5, 12);
        let scope = &scopes[i % 3];
        let f = random_formula(&mut rng, &vocab, scope, 6, 12);
        let env: HashMap<String, usize> = scope.iter().map(|v| (v.clone(), rng.gen_range(0..m.size()))).collect();
        let got = Evaluator::new(&m).eval(&f, &assignment(&env)).map_err(|e| e.to_string())?;
        let want = naive_eval(&m, &f, &env);
        ensure!(got == want, "instance {i}: {} gives {} but the oracle gives {}", render(&f), format_rational(&got), format_rational(&want));
        let core = Evaluator::new(&m).eval(&f.expand(), &assignment(&env)).map_err(|e| e.to_string())?;
        ensure!(core == want, "instance {i}: expanded form of {} disagrees", render(&f));
    }
    Ok("2000 instances agree exactly".into())
}

fn algebra_laws() -> Outcome {
    let vocab = test_vocabulary();
    let mut rng = rng(0x5eed_0002);
    let mut identity_two = 0;
    for i in 0..1000 {
        let m = random_structure(&mut rng, &vocab, 4, 12);
        let phi = random_formula(&mut rng, &vocab, &[], 4, 12);
        let psi = random_formula(&mut rng, &vocab, &[], 4, 12);
        let r = random_value(&mut rng, 12);
        let s = random_value(&mut rng, 12);
        let (a, b) = (engine(&m, &phi), engine(&m, &psi));
        let one = Rational::one();
        let ev = |f: Formula| -> (Rational, Rational) {
            let core = f.expand();
            (engine(&m, &f), engine(&m, &core))
        };
        let checks = [
            ("negation", ev(Formula::not(phi.clone())), one.clone() - a.clone()),
            ("disjunction", ev(Formula::or(phi.clone(), psi.clone())), a.clone().max(b.clone())),
            ("conjunction", ev(Formula::and(phi.clone(), psi.clone())), a.clone().min(b.clone())),
        ];
        for (law, (direct, core), want) in checks {
            ensure!(direct == want && core == want, "instance {i}: {law} law fails for {}", render(&phi));
        }
        let (le, le_core) = ev(Formula::leq(phi.clone(), r.clone()));
        ensure!((le.is_one() && le_core.is_one()) == (a <= r), "instance {i}: (phi <= r) = 1 iff phi <= r fails");
        let (ge, ge_core) = ev(Formula::geq(phi.clone(), r.clone()));
        ensure!((ge.is_one() && ge_core.is_one()) == (a >= r), "instance {i}: (phi >= r) = 1 iff phi >= r fails");
        ensure!(a <= ge, "instance {i}: phi <= (phi >= r) fails");
        if r.clone() + s.clone() >= one {
            identity_two += 1;
            let nested = engine(&m, &Formula::geq(Formula::geq(phi.clone(), r.clone()), s.clone()));
            let flat = engine(&m, &Formula::geq(phi.clone(), r.clone() + s.clone() - one.clone()));
            ensure!(nested == flat, "instance {i}: ((phi >= r) >= s) differs from phi >= r+s-1");
        }
    }
    Ok(format!("1000 instances, nested threshold identity exercised on {identity_two}"))
}

fn half_scaling() -> Outcome {
    let mut worst = Rational::zero();
    for n in [2usize, 4, 8, 16, 32, 64, 128, 256] {
        let t = half_approx(n).map_err(|e| e.to_string())?;
        let h = ratio(1, 8 * n as i64);
        let tol = ratio(1, n as i64);
        let half = ratio(1, 2);
        for x in grid(&h) {
            // Ratio<i64> keeps this loop fast; denominators stay below 8n.
            let small = SmallRational::from_rational(&x).ok_or("grid point does not fit")?;
            let v = eval_term(&t, &[small]).map_err(|e| e.to_string())?.to_rational().ok_or("value does not fit")?;
            let err = (v - x.clone() * half.clone()).abs();
            ensure!(err <= tol, "n = {n}: error {} at x = {}", format_rational(&err), format_rational(&x));
        }
        let bound = certify(&t, &half_target(), &h, &half).map_err(|e| e.to_string())?;
        let limit = tol.clone() + h.clone();
        ensure!(bound <= limit, "n = {n}: certified bound {} exceeds {}", format_rational(&bound), format_rational(&limit));
        worst = worst.max(bound * Rational::from_integer(n.into()));
    }
    Ok(format!("n up to 256, certified bound at most {}/n", format_rational(&worst)))
}

fn random_connective(rng: &mut StdRng, b: &mut Builder, arity: usize, depth: usize) -> Id {
    if depth == 0 || rng.gen_range(0..5) == 0 {
        return if rng.gen_bool(0.7) {
            b.proj(rng.gen_range(0..arity)).unwrap()
        } else {
            b.constant(random_value(rng, 12)).unwrap()
        };
    }
    let x = random_connective(rng, b, arity, depth - 1);
    let y = random_connective(rng, b, arity, depth - 1);
    match rng.gen_range(0..6) {
        0 | 1 => b.implies(x, y),
        2 => b.not(x),
        3 => b.or(x, y),
        4 => b.oplus(x, y),
        _ => b.ominus(x, y),
    }
}

fn connective_homomorphism() -> Outcome {
    let vocab = test_vocabulary();
    let mut rng = rng(0x5eed_0004);
    for i in 0..500 {
        let arity = rng.gen_range(1..=3);
        let mut b = Builder::new(arity);
        let root = random_connective(&mut rng, &mut b, arity, 5);
        let t: ConnectiveTerm = b.finish(root);
        let m = random_structure(&mut rng, &vocab, 4, 12);
        let fs: Vec<Formula> = (0..arity).map(|_| random_formula(&mut rng, &vocab, &[], 3, 12)).collect();
        let composite = apply_connective(&t, &fs).map_err(|e| e.to_string())?;
        let values: Vec<Rational> = fs.iter().map(|f| naive_sentence(&m, f)).collect();
        let want: Rational = eval_term(&t, &values).map_err(|e| e.to_string())?;
        let got = engine(&m, &composite);
        ensure!(got == want, "instance {i}: {t} applied gives {} but pointwise gives {}", format_rational(&got), format_rational(&want));
        ensure!(naive_sentence(&m, &composite) == want, "instance {i}: the oracle disagrees on the composite");
    }
    Ok("500 triples commute exactly".into())
}

/// A structure whose `P` is crisp, contains `c`, and is closed under `f`.
fn relativizable(rng: &mut StdRng) -> Structure {
    let vocab = test_vocabulary();
    let mut m = random_structure(rng, &vocab, 5, 12);
    let n = m.size();
    let mut inside = vec![false; n];
    inside[m.constant("c").unwrap()] = true;
    for slot in inside.iter_mut() {
        if rng.gen_bool(0.4) {
            *slot = true;
        }
    }
    loop {
        let mut changed = false;
        for a in 0..n {
            let b = m.operation_value("f", &[a]).unwrap();
            if inside[a] && !inside[b] {
                inside[b] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    m.remove_symbol("P");
    let values = inside.iter().map(|&i| if i { Rational::one() } else { Rational::zero() }).collect();
    m.add_predicate("P", 1, values).unwrap();
    m
}

fn relativization() -> Outcome {
    let mut rng = rng(0x5eed_0005);
    let base = without_p();
    let corpus: Vec<Formula> = (0..200).map(|_| random_formula(&mut rng, &base, &[], 3, 12)).collect();
    let fixtures: Vec<Structure> = (0..20).map(|_| relativizable(&mut rng)).collect();
    for (j, m) in fixtures.iter().enumerate() {
        let restricted = restrict_to_predicate(m, "P").map_err(|e| e.to_string())?;
        for phi in &corpus {
            let rel = relativize_monadic(phi, "P").map_err(|e| e.to_string())?;
            let got = engine(m, &rel);
            let want = engine(&restricted, phi);
            ensure!(got == want, "fixture {j}: {} relativized gives {}, restriction gives {}", render(phi), format_rational(&got), format_rational(&want));
            ensure!(want == naive_sentence(&restricted, phi), "fixture {j}: the oracle disagrees on {}", render(phi));
        }
    }
    for i in 0..50 {
        let gamma = random_formula(&mut rng, &base, &[], 3, 12);
        let m0 = random_structure(&mut rng, &base, 3, 12);
        let m1 = random_structure(&mut rng, &base, 3, 12);
        let c = combine(&m0, &m1).map_err(|e| e.to_string())?;
        for (k, mk) in [&m0, &m1].into_iter().enumerate() {
            let renamed = c.renamings[k].apply_formula(&gamma);
            let rel = relativize_monadic(&renamed, &c.parts[k]).map_err(|e| e.to_string())?;
            let got = engine(&c.structure, &rel);
            let want = naive_sentence(mk, &gamma);
            ensure!(got == want, "pair {i}, part {k}: {} gives {} on the combination, {} on the part", render(&gamma), format_rational(&got), format_rational(&want));
        }
    }
    Ok("4000 corpus checks and 50 combined pairs agree".into())
}

fn strict_total_order(n: usize, lt: &[bool]) -> bool {
    let less = |a: usize, b: usize| lt[a * n + b];
    (0..n).all(|a| !less(a, a))
        && (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(less(a, b) && less(b, c)) || less(a, c))))
        && (0..n).all(|a| (0..n).all(|b| a == b || less(a, b) || less(b, a)))
}

fn discrete_order() -> Outcome {
    let theta = order_theory(&OrderTheorySpec::new("P", "LT"), &Vocabulary::new()).map_err(|e| e.to_string())?;
    let mut cases = 0u64;
    let mut orders = 0u64;
    for n in 1..=4usize {
        let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        for mask in 0u32..(1 << (n * n)) {
            let lt: Vec<bool> = (0..n * n).map(|k| mask >> k & 1 == 1).collect();
            let mut m: Structure<SmallRational> = Structure::discrete(&names).unwrap();
            m.add_predicate("P", 1, vec![SmallRational::one(); n]).unwrap();
            let values = lt.iter().map(|&b| if b { SmallRational::one() } else { SmallRational::zero() }).collect();
            m.add_predicate("LT", 2, values).unwrap();
            let ev = Evaluator::new(&m);
            let satisfied = theta.sentences.iter().all(|s| ev.sentence(s).unwrap().is_one());
            let classical = strict_total_order(n, &lt);
            ensure!(satisfied == classical, "size {n}, relation mask {mask:#b}: theory says {satisfied}, classical check says {classical}");
            cases += 1;
            orders += classical as u64;
        }
    }
    Ok(format!("{cases} structures, {orders} strict total orders, exact agreement"))
}

struct Problem {
    signature: Signature,
    max_size: usize,
    truth: u32,
    metric: u32,
    seed: u64,
    theory: Vec<&'static str>,
    types: Vec<Vec<&'static str>>,
}

fn problem(vocab: &Vocabulary, max_size: usize, truth: u32, theory: Vec<&'static str>, types: Vec<Vec<&'static str>>) -> Problem {
    Problem {
        signature: Signature::new(vocab.clone()),
        max_size,
        truth,
        metric: 1,
        seed: 0,
        theory,
        types,
    }
}

fn parse_problem(p: &Problem) -> (SearchSpace, Theory, Vec<TypeSet>) {
    let vocab = &p.signature.vocabulary;
    let theory = Theory::new("T", p.theory.iter().map(|s| parse_formula(s, vocab).unwrap()).collect()).unwrap();
    let types = p
        .types
        .iter()
        .enumerate()
        .map(|(i, fs)| {
            let vars: Vec<String> = vec!["x".into()];
            TypeSet::new(&format!("S{i}"), vars, fs.iter().map(|s| parse_formula(s, vocab).unwrap()).collect()).unwrap()
        })
        .collect();
    let space = SearchSpace {
        signature: p.signature.clone(),
        max_size: p.max_size,
        truth_resolution: p.truth,
        metric_resolution: p.metric,
        seed: p.seed,
    };
    (space, theory, types)
}

/// Independent check of a candidate: theory and omissions by the oracle,
/// moduli of unary predicates and the metric by direct loops.
fn oracle_accepts(m: &Structure, sig: &Signature, theory: &Theory, types: &[TypeSet]) -> bool {
    let n = m.size();
    for (symbol, pairs) in &sig.moduli {
        let table = &m.predicate(symbol).unwrap().values;
        for a in 0..n {
            for b in 0..n {
                for (eps, delta) in pairs {
                    let moved = (table[a].clone() - table[b].clone()).abs();
                    if m.distance(a, b) < delta && moved > *eps {
                        return false;
                    }
                }
            }
        }
    }
    if !theory.sentences.iter().all(|s| naive_sentence(m, s).is_one()) {
        return false;
    }
    types.iter().all(|t| {
        (0..n).all(|a| {
            let env: HashMap<String, usize> = [(t.variables[0].clone(), a)].into();
            t.formulas.iter().any(|f| !naive_eval(m, f, &env).is_one())
        })
    })
}

fn metric_tables(n: usize, res: u32) -> Vec<Vec<Rational>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for choice in tuples(res as usize, pairs.len()) {
        let mut d = vec![Rational::zero(); n * n];
        for (&(i, j), &c) in pairs.iter().zip(&choice) {
            d[i * n + j] = ratio(c as i64 + 1, res as i64);
            d[j * n + i] = ratio(c as i64 + 1, res as i64);
        }
        let ok = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| d[a * n + c] <= d[a * n + b].clone() + d[b * n + c].clone())));
        if ok {
            out.push(d);
        }
    }
    out
}

/// Brute force over one universe size: (candidates, models).
fn brute_force(p: &Problem, n: usize, theory: &Theory, types: &[TypeSet]) -> (u64, u64) {
    let vocab = &p.signature.vocabulary;
    let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut slots: Vec<(String, usize, bool)> = Vec::new();
    for (s, &a) in &vocab.predicates {
        slots.push((s.clone(), a, true));
    }
    for (s, &a) in &vocab.operations {
        slots.push((s.clone(), a, false));
    }
    let mut candidates = 0;
    let mut models = 0;
    for metric in metric_tables(n, p.metric) {
        let tables: Vec<Vec<Vec<usize>>> = slots
            .iter()
            .map(|(_, a, is_pred)| {
                let radix = if *is_pred { p.truth as usize + 1 } else { n };
                tuples(radix, n.pow(*a as u32)).collect()
            })
            .collect();
        let counts: Vec<usize> = tables.iter().map(Vec::len).collect();
        for choice in tuples_mixed(&counts) {
            let mut m = Structure::discrete(&names).unwrap();
            for a in 0..n {
                for b in 0..n {
                    m.set_distance_directed(a, b, metric[a * n + b].clone()).unwrap();
                }
            }
            for ((name, arity, is_pred), (table, &k)) in slots.iter().zip(tables.iter().zip(&choice)) {
                let row = &table[k];
                if *is_pred {
                    m.add_predicate(name, *arity, row.iter().map(|&v| ratio(v as i64, p.truth as i64)).collect()).unwrap();
                } else if *arity == 0 {
                    m.add_constant(name, row[0]).unwrap();
                } else {
                    m.add_operation(name, *arity, row.clone()).unwrap();
                }
            }
            candidates += 1;
            if oracle_accepts(&m, &p.signature, theory, types) {
                models += 1;
            }
        }
    }
    (candidates, models)
}

fn tuples_mixed(radices: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &r in radices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r).map(move |v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn omission_problems() -> Vec<Problem> {
    let v1 = Vocabulary::new().with_predicate("P", 1).unwrap().with_constant("c").unwrap();
    let v2 = v1.clone().with_operation("f", 1).unwrap();
    let v3 = Vocabulary::new().with_predicate("R", 2).unwrap().with_constant("c").unwrap();
    let mut out = vec![
        problem(&v1, 2, 2, vec!["P(c)"], vec![vec!["P(x)", "d(x,c) >= 1"]]),
        problem(&v1, 2, 2, vec!["0"], vec![vec!["P(x)", "d(x,c) >= 1"]]),
        problem(&v1, 3, 4, vec!["E x. (P(x) <= 1/4)", "E x. (P(x) >= 3/4)"], vec![vec!["P(x) >= 1/4", "P(x) <= 3/4"]]),
        problem(&v1, 3, 4, vec!["E x. ((d(x,c) >= 1/2) /\\ (d(x,c) <= 1/2))"], vec![]),
        problem(&v1, 3, 2, vec!["A x. P(x)"], vec![vec!["P(x)"]]),
        problem(&v2, 3, 2, vec!["P(c)", "~P(f(c))"], vec![vec!["P(f(x))"]]),
        problem(&v2, 2, 2, vec!["A x. (P(x) \\/ ~P(x))"], vec![vec!["P(x)"], vec!["~P(x)"]]),
        problem(&v3, 3, 2, vec!["A x. ~R(x,x)", "A x. A y. (R(x,y) -> ~R(y,y))"], vec![vec!["A y. (R(x,y) <= 0)"]]),
        problem(&v1, 2, 4, vec!["E x. E y. ((d(x,y) <= 1/4) /\\ (P(x) <= 0) /\\ (P(y) >= 1))"], vec![]),
        problem(&v1, 3, 3, vec!["E x. (P(x) >= 2/3)", "E x. (P(x) <= 1/3)"], vec![vec!["P(x) >= 1/3", "P(x) <= 2/3"], vec!["P(x)"]]),
    ];
    out[3].metric = 2;
    out[6].seed = 5;
    out[8].metric = 4;
    out[8].signature = Signature::new(v1).with_modulus("P", ratio(1, 4), ratio(1, 2));
    out[9].seed = 2;
    out
}

fn omission_search() -> Outcome {
    let mut found = 0;
    for (i, p) in omission_problems().iter().enumerate() {
        let (space, theory, types) = parse_problem(p);
        let mut outputs = Vec::new();
        for workers in [1, 4] {
            for _ in 0..3 {
                let out = search_model(&space, &theory, &types, workers).map_err(|e| format!("problem {i}: {e}"))?;
                outputs.push((out.clone(), serde_json::to_string(&search_to_json(&out)).unwrap()));
            }
        }
        ensure!(outputs.iter().all(|o| o.1 == outputs[0].1), "problem {i}: outputs differ across runs or worker counts");
        let sizes: Vec<(u64, u64)> = (1..=p.max_size).map(|n| brute_force(p, n, &theory, &types)).collect();
        match &outputs[0].0 {
            SearchOutcome::Found { structure, examined } => {
                found += 1;
                ensure!(oracle_accepts(structure, &p.signature, &theory, &types), "problem {i}: the returned structure fails the oracle");
                let n = structure.size();
                ensure!(sizes[..n - 1].iter().all(|s| s.1 == 0), "problem {i}: a smaller model exists");
                let before: u64 = sizes[..n - 1].iter().map(|s| s.0).sum();
                ensure!(*examined > before && *examined <= before + sizes[n - 1].0, "problem {i}: examined count {examined} is out of range");
            }
            SearchOutcome::Exhausted { examined } => {
                ensure!(sizes.iter().all(|s| s.1 == 0), "problem {i}: exhausted, but brute force finds a model");
                let total: u64 = sizes.iter().map(|s| s.0).sum();
                ensure!(*examined == total, "problem {i}: examined {examined}, brute force counts {total}");
            }
        }
    }
    Ok(format!("10 problems ({found} found, {} exhausted), stable across runs and workers 1 and 4", 10 - found))
}

fn refutation_vocabulary() -> Vocabulary {
    Vocabulary::new()
        .with_predicate("P", 1)
        .unwrap()
        .with_predicate("R", 2)
        .unwrap()
        .with_constant("c")
        .unwrap()
}

/// Small structures over values `{0, 1/2, 1}` so that exact 1s are common.
fn coarse_structure(rng: &mut StdRng, vocab: &Vocabulary, max_size: usize, discrete: bool) -> Structure {
    let mut m = random_structure(rng, vocab, max_size, 2);
    if discrete {
        for a in 0..m.size() {
            for b in 0..m.size() {
                let v = if a == b { Rational::zero() } else { Rational::one() };
                m.set_distance_directed(a, b, v).unwrap();
            }
        }
    }
    m
}

fn realizes_naive(m: &Structure, set: &TypeSet, tuple: &[usize]) -> bool {
    let env: HashMap<String, usize> = set.variables.iter().cloned().zip(tuple.iter().copied()).collect();
    set.formulas.iter().all(|f| naive_eval(m, f, &env).is_one())
}

fn models<'a>(family: &'a [Structure], t: &'a Theory) -> impl Iterator<Item = (usize, &'a Structure)> {
    family.iter().enumerate().filter(move |(_, m)| t.sentences.iter().all(|s| naive_sentence(m, s).is_one()))
}

/// Checks a reported entailment failure against the oracle.
fn genuine(
    family: &[Structure],
    t: &Theory,
    gamma: &TypeSet,
    sigma: &TypeSet,
    c: &pavelka::evaluator::Counterexample<Rational>,
) -> Result<(), String> {
    let m = &family[c.structure];
    ensure!(t.sentences.iter().all(|s| naive_sentence(m, s).is_one()), "counterexample structure is not a model");
    ensure!(realizes_naive(m, gamma, &c.tuple), "counterexample tuple does not realize the hypothesis");
    ensure!(sigma.formulas.contains(&c.formula), "counterexample formula is not in the conclusion");
    let env: HashMap<String, usize> = sigma.variables.iter().cloned().zip(c.tuple.iter().copied()).collect();
    let v = naive_eval(m, &c.formula, &env);
    ensure!(v == c.value && !v.is_one(), "counterexample value {} does not re-evaluate", format_rational(&c.value));
    Ok(())
}

fn refutations() -> Outcome {
    let vocab = refutation_vocabulary();
    let mut rng = rng(0x5eed_0008);
    let pool = [
        "P(x)", "P(x) >= 1/2", "~P(x)", "R(x,c)", "R(x,x) \\/ P(x)", "d(x,c) <= 1/2", "E y. R(x,y)", "A y. (R(y,x) >= 1/2)",
        "P(c) -> P(x)",
    ];
    let omega_pool = ["P(y)", "R(y,c)", "E z. R(y,z)", "P(y) /\\ R(y,y)"];
    let theories = [vec![], vec!["E x. P(x)"], vec!["A x. (P(x) >= 1/2)"]];
    let parse = |s: &str| parse_formula(s, &vocab).unwrap();
    let ty = |idx: &[usize]| TypeSet::new("S", vec!["x".into()], idx.iter().map(|&i| parse(pool[i])).collect()).unwrap();
    let mut refuted = 0;
    let mut verdicts = 0;
    for round in 0..40 {
        let family: Vec<Structure> = (0..rng.gen_range(1..=4)).map(|_| coarse_structure(&mut rng, &vocab, 3, round % 2 == 0)).collect();
        let t = Theory::new("T", theories[round % 3].iter().map(|s| parse(s)).collect()).unwrap();
        for _ in 0..10 {
            let pick = |rng: &mut StdRng| -> Vec<usize> { (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..pool.len())).collect() };
            let gamma = ty(&pick(&mut rng));
            let sigma = ty(&pick(&mut rng));
            let e = entails(&family, &t, &gamma, &sigma).map_err(|e| e.to_string())?;
            let truth = models(&family, &t).all(|(_, m)| {
                tuples(m.size(), 1).all(|a| !realizes_naive(m, &gamma, &a) || realizes_naive(m, &sigma, &a))
            });
            ensure!(e.holds == truth, "round {round}: entailment verdict disagrees with brute force");
            verdicts += 1;
            if let Some(c) = &e.counterexample {
                genuine(&family, &t, &gamma, &sigma, c).map_err(|m| format!("round {round}, entails: {m}"))?;
                refuted += 1;
            }
            let g = generator_check(&family, &t, &gamma, &sigma).map_err(|e| e.to_string())?;
            verdicts += 1;
            if !g.holds {
                refuted += 1;
                match &g.realization {
                    None => {
                        let any = models(&family, &t).any(|(_, m)| tuples(m.size(), 1).any(|a| realizes_naive(m, &gamma, &a)));
                        ensure!(!any, "round {round}: generator reported unsatisfiable, but a model realizes it");
                    }
                    Some((i, tuple)) => {
                        ensure!(realizes_naive(&family[*i], &gamma, tuple), "round {round}: reported realization is not one");
                        let c = g.entailment.counterexample.as_ref().ok_or("generator failed without a witness")?;
                        genuine(&family, &t, &gamma, &sigma, c).map_err(|m| format!("round {round}, generator: {m}"))?;
                    }
                }
            }
            let terms = if rng.gen_bool(0.5) { "y" } else { "c" };
            let cand = OmegaCandidate {
                variables: vec!["y".into()],
                terms: vec![parse_term(terms, &vocab).unwrap()],
                formula: parse(omega_pool[rng.gen_range(0..omega_pool.len())]),
                threshold: ratio(rng.gen_range(1..4), 4),
            };
            let o = omega_principal_check(&family, &t, &sigma, &cand).map_err(|e| e.to_string())?;
            verdicts += 1;
            let target = sigma.substitute_terms(&cand.terms, cand.variables.clone()).unwrap();
            let single = TypeSet::new("phi", cand.variables.clone(), vec![cand.formula.clone()]).unwrap();
            let guard = TypeSet::new("g", cand.variables.clone(), vec![Formula::geq(cand.formula.clone(), cand.threshold.clone())]).unwrap();
            if !o.generator.holds {
                if let Some(c) = &o.generator.entailment.counterexample {
                    genuine(&family, &t, &single, &target, c).map_err(|m| format!("round {round}, clause a: {m}"))?;
                } else {
                    let any = models(&family, &t).any(|(_, m)| tuples(m.size(), 1).any(|a| realizes_naive(m, &single, &a)));
                    ensure!(!any, "round {round}: clause a reported unsatisfiable, but a model realizes it");
                }
            }
            if let Some(c) = &o.threshold.counterexample {
                genuine(&family, &t, &guard, &target, c).map_err(|m| format!("round {round}, clause b: {m}"))?;
            }
            if !o.holds {
                refuted += 1;
            }
        }
    }
    ensure!(refuted > 0, "no false verdicts were produced");
    Ok(format!("{verdicts} verdicts, {refuted} refutations with genuine witnesses"))
}

fn ball_property() -> Outcome {
    let vocab = refutation_vocabulary();
    let mut rng = rng(0x5eed_0009);
    let parse = |s: &str| parse_formula(s, &vocab).unwrap();
    let one_var = [vec!["P(x)"], vec!["P(x) >= 1/2", "R(x,c)"], vec!["E y. R(x,y)"], vec![]];
    let two_var = [vec!["R(x,y)"], vec!["P(x)", "~P(y)"], vec!["d(x,y) >= 1", "R(y,x) >= 1/2"]];
    let mut checked = 0;
    for _ in 0..12 {
        let m = coarse_structure(&mut rng, &vocab, 3, true);
        let sets: Vec<TypeSet> = one_var
            .iter()
            .map(|fs| TypeSet::new("S", vec!["x".into()], fs.iter().map(|s| parse(s)).collect()).unwrap())
            .chain(two_var.iter().map(|fs| TypeSet::new("S", vec!["x".into(), "y".into()], fs.iter().map(|s| parse(s)).collect()).unwrap()))
            .collect();
        for sigma in &sets {
            for delta in [ratio(0, 1), ratio(1, 2), ratio(1, 1)] {
                let thick = thicken(sigma, &delta, &ThickenOptions::default()).map_err(|e| e.to_string())?;
                for a in tuples(m.size(), sigma.arity()) {
                    if !realizes(&m, &a, sigma).unwrap() {
                        continue;
                    }
                    ensure!(realizes_naive(&m, sigma, &a), "engine and oracle disagree on a realization");
                    for b in tuples(m.size(), sigma.arity()) {
                        let close = a.iter().zip(&b).all(|(&x, &y)| *m.distance(x, y) <= delta);
                        if !close {
                            continue;
                        }
                        checked += 1;
                        ensure!(realizes(&m, &b, &thick).unwrap(), "tuple within {} of a realization misses the thickening", format_rational(&delta));
                        ensure!(realizes_naive(&m, &thick, &b), "the oracle rejects a tuple in the ball");
                    }
                }
            }
        }
    }
    ensure!(checked > 0, "no realized tuples in the fixtures");
    Ok(format!("{checked} (realization, nearby tuple) pairs"))
}

fn type_metric() -> Outcome {
    let vocab = Vocabulary::new().with_predicate("P", 1).unwrap().with_constant("c").unwrap();
    let mut rng = rng(0x5eed_000a);
    let theories = [Theory::empty(), Theory::new("T", vec![parse_formula("E x. P(x)", &vocab).unwrap()]).unwrap()];
    let mut families = 0;
    for round in 0..24 {
        let family: Vec<Structure> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let mut m = random_structure(&mut rng, &vocab, 3, 1);
                let n = m.size();
                let metric = random_metric(&mut rng, n, 4);
                for a in 0..n {
                    for b in 0..n {
                        m.set_distance_directed(a, b, metric[a * n + b].clone()).unwrap();
                    }
                }
                m
            })
            .collect();
        let t = &theories[round % 2];
        for arity in 1..=2 {
            let records: Vec<CompleteTypeRecord> = models(&family, t)
                .flat_map(|(i, m)| tuples(m.size(), arity).map(move |tuple| CompleteTypeRecord { structure: i, tuple }))
                .collect();
            let k = records.len();
            let mut d = vec![Rational::zero(); k * k];
            for (i, p) in records.iter().enumerate() {
                for (j, q) in records.iter().enumerate() {
                    let r = type_distance(&family, t, p, q, &RecordEquivalence::Isomorphism).map_err(|e| e.to_string())?;
                    ensure!(r.value >= Rational::zero() && r.value <= Rational::one(), "distance out of range");
                    d[i * k + j] = r.value;
                }
            }
            for i in 0..k {
                ensure!(d[i * k + i].is_zero(), "round {round}: d(p,p) is not 0");
                for j in 0..k {
                    ensure!(d[i * k + j] == d[j * k + i], "round {round}: asymmetric distance");
                    for l in 0..k {
                        ensure!(d[i * k + l] <= d[i * k + j].clone() + d[j * k + l].clone(), "round {round}: triangle inequality fails");
                    }
                }
            }
        }
        families += 1;
    }
    Ok(format!("{families} families, records of arity 1 and 2"))
}

type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact evaluation matches the naive oracle", exact_evaluation, 30),
        ("Lukasiewicz algebra laws and threshold identities", algebra_laws, 10),
        ("half-scaling approximation and certified bound", half_scaling, 20),
        ("connective application commutes with evaluation", connective_homomorphism, 10),
        ("relativization equals restriction", relativization, 60),
        ("discrete linear ordering theory", discrete_order, 60),
        ("omission search soundness and determinism", omission_search, 120),
        ("refutation witnesses are genuine", refutations, 10),
        ("thickening contains the ball around realizations", ball_property, 10),
        ("type distance is a pseudometric", type_metric, 10),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(limit) => Err(format!("{detail}, but took longer than {limit} s")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {name}: {why} [{:.2} s]", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
