//! Shared test support: a direct recursive evaluator used as an oracle and
//! seeded generators for structures and formulas.
#![allow(dead_code)]

use std::collections::HashMap;

use num_traits::{One, Zero};
use pavelka::syntax::{Formula, Term, Vocabulary};
use pavelka::{Rational, Structure};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn naive_term(m: &Structure, t: &Term, env: &HashMap<String, usize>) -> usize {
    match t {
        Term::Var(v) => env[v],
        Term::Const(c) => m.constant(c).unwrap(),
        Term::App(f, args) => {
            let vals: Vec<usize> = args.iter().map(|a| naive_term(m, a, env)).collect();
            m.operation_value(f, &vals).unwrap()
        }
    }
}

fn lukasiewicz(a: Rational, b: Rational) -> Rational {
    let v = Rational::one() - a + b;
    if v > Rational::one() {
        Rational::one()
    } else {
        v
    }
}

/// Evaluates straight from the semantic clauses: every node recomputed, every
/// quantifier a full loop, abbreviations by their closed forms.
pub fn naive_eval(m: &Structure, f: &Formula, env: &HashMap<String, usize>) -> Rational {
    match f {
        Formula::Metric(a, b) => m.distance(naive_term(m, a, env), naive_term(m, b, env)).clone(),
        Formula::Pred(p, args) => {
            let vals: Vec<usize> = args.iter().map(|a| naive_term(m, a, env)).collect();
            m.predicate_value(p, &vals).unwrap().clone()
        }
        Formula::Implies(a, b) => lukasiewicz(naive_eval(m, a, env), naive_eval(m, b, env)),
        Formula::Const(r) => r.clone(),
        Formula::Not(a) => Rational::one() - naive_eval(m, a, env),
        Formula::Or(a, b) => naive_eval(m, a, env).max(naive_eval(m, b, env)),
        Formula::And(a, b) => naive_eval(m, a, env).min(naive_eval(m, b, env)),
        Formula::Leq(a, r) => lukasiewicz(naive_eval(m, a, env), r.clone()),
        Formula::Geq(a, r) => lukasiewicz(r.clone(), naive_eval(m, a, env)),
        Formula::Exists(x, body) | Formula::Forall(x, body) => {
            let mut env = env.clone();
            let values = (0..m.size()).map(|a| {
                env.insert(x.clone(), a);
                naive_eval(m, body, &env)
            });
            let values: Vec<Rational> = values.collect();
            if matches!(f, Formula::Exists(..)) {
                values.into_iter().max().unwrap()
            } else {
                values.into_iter().min().unwrap()
            }
        }
    }
}

pub fn naive_sentence(m: &Structure, f: &Formula) -> Rational {
    naive_eval(m, f, &HashMap::new())
}

/// `P/1, R/2, Q/0, f/1, c`.
pub fn test_vocabulary() -> Vocabulary {
    Vocabulary::new()
        .with_predicate("P", 1)
        .unwrap()
        .with_predicate("R", 2)
        .unwrap()
        .with_predicate("Q", 0)
        .unwrap()
        .with_operation("f", 1)
        .unwrap()
        .with_constant("c")
        .unwrap()
}

pub fn random_value(rng: &mut StdRng, max_denominator: i64) -> Rational {
    let d = rng.gen_range(1..=max_denominator);
    q(rng.gen_range(0..=d), d)
}

/// A genuine metric: random positive values closed under shortest paths.
pub fn random_metric(rng: &mut StdRng, n: usize, max_denominator: i64) -> Vec<Rational> {
    let mut d = vec![Rational::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let den = rng.gen_range(1..=max_denominator);
            let v = q(rng.gen_range(1..=den), den);
            d[i * n + j] = v.clone();
            d[j * n + i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k].clone() + d[k * n + j].clone();
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

/// A random structure for `vocab` with `1..=max_size` elements.
pub fn random_structure(rng: &mut StdRng, vocab: &Vocabulary, max_size: usize, max_denominator: i64) -> Structure {
    let n = rng.gen_range(1..=max_size);
    let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut m = Structure::discrete(&names).unwrap();
    let d = random_metric(rng, n, max_denominator);
    for a in 0..n {
        for b in 0..n {
            m.set_distance_directed(a, b, d[a * n + b].clone()).unwrap();
        }
    }
    for (p, &arity) in &vocab.predicates {
        let values = (0..n.pow(arity as u32)).map(|_| random_value(rng, max_denominator)).collect();
        m.add_predicate(p, arity, values).unwrap();
    }
    for (f, &arity) in &vocab.operations {
        if arity == 0 {
            m.add_constant(f, rng.gen_range(0..n)).unwrap();
        } else {
            let values = (0..n.pow(arity as u32)).map(|_| rng.gen_range(0..n)).collect();
            m.add_operation(f, arity, values).unwrap();
        }
    }
    m
}

fn random_term(rng: &mut StdRng, vocab: &Vocabulary, scope: &[String], depth: usize) -> Term {
    let constants: Vec<&str> = vocab.constants().collect();
    let ops: Vec<(&String, &usize)> = vocab.operations.iter().filter(|(_, &a)| a > 0).collect();
    let pick = rng.gen_range(0..10);
    if depth > 0 && pick < 2 && !ops.is_empty() {
        let (f, &arity) = ops[rng.gen_range(0..ops.len())];
        let args = (0..arity).map(|_| random_term(rng, vocab, scope, depth - 1)).collect();
        return Term::app(f, args);
    }
    if (pick < 4 || scope.is_empty()) && !constants.is_empty() {
        return Term::constant(constants[rng.gen_range(0..constants.len())]);
    }
    Term::var(scope.choose(rng).expect("some term is available"))
}

fn random_atom(rng: &mut StdRng, vocab: &Vocabulary, scope: &[String], max_denominator: i64) -> Formula {
    let preds: Vec<(&String, &usize)> = vocab.predicates.iter().collect();
    match rng.gen_range(0..10) {
        0..=1 => Formula::constant(random_value(rng, max_denominator)),
        2..=3 => Formula::metric(random_term(rng, vocab, scope, 1), random_term(rng, vocab, scope, 1)),
        _ if preds.is_empty() => Formula::constant(random_value(rng, max_denominator)),
        _ => {
            let (p, &arity) = preds[rng.gen_range(0..preds.len())];
            Formula::pred(p, (0..arity).map(|_| random_term(rng, vocab, scope, 1)).collect())
        }
    }
}

/// A random formula of depth at most `depth` whose free variables lie in
/// `scope`. Quantifiers bind `x`, `y`, `z`, possibly shadowing. When
/// `scope` is empty and the vocabulary has no constants, terms only occur
/// under quantifiers.
pub fn random_formula(
    rng: &mut StdRng,
    vocab: &Vocabulary,
    scope: &[String],
    depth: usize,
    max_denominator: i64,
) -> Formula {
    let has_terms = !scope.is_empty() || vocab.constants().next().is_some();
    if depth == 0 || rng.gen_range(0..6) == 0 {
        if !has_terms {
            return match vocab.predicates.iter().find(|(_, &a)| a == 0) {
                Some((p, _)) if rng.gen_bool(0.5) => Formula::pred(p, vec![]),
                _ => Formula::constant(random_value(rng, max_denominator)),
            };
        }
        return random_atom(rng, vocab, scope, max_denominator);
    }
    let sub = |rng: &mut StdRng, scope: &[String]| random_formula(rng, vocab, scope, depth - 1, max_denominator);
    match rng.gen_range(0..10) {
        0..=1 => Formula::implies(sub(rng, scope), sub(rng, scope)),
        2 => Formula::not(sub(rng, scope)),
        3 => Formula::or(sub(rng, scope), sub(rng, scope)),
        4 => Formula::and(sub(rng, scope), sub(rng, scope)),
        5 => Formula::leq(sub(rng, scope), random_value(rng, max_denominator)),
        6 => Formula::geq(sub(rng, scope), random_value(rng, max_denominator)),
        k => {
            let x = ["x", "y", "z"][rng.gen_range(0..3)].to_string();
            let mut inner: Vec<String> = scope.to_vec();
            if !inner.contains(&x) {
                inner.push(x.clone());
            }
            let body = sub(rng, &inner);
            if k <= 8 {
                Formula::exists(&x, body)
            } else {
                Formula::forall(&x, body)
            }
        }
    }
}

/// All assignments of `vars` to elements, for checking open formulas.
pub fn environments(m: &Structure, vars: &[String]) -> Vec<HashMap<String, usize>> {
    pavelka::structures::tuples(m.size(), vars.len())
        .map(|t| vars.iter().cloned().zip(t).collect())
        .collect()
}
