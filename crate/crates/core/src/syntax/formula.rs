use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};

use super::{SyntaxError, Vocabulary};
use crate::Rational;

/// A first-order term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A constant symbol (an arity-0 operation).
    Const(String),
    /// `f(t1, ..., tn)` with `n >= 1`.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_owned())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_owned())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Const(name.to_owned())
        } else {
            Term::App(name.to_owned(), args)
        }
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|t| t.substitute(map)).collect())
            }
        }
    }

    pub fn check(&self, vocab: &Vocabulary) -> Result<(), SyntaxError> {
        match self {
            Term::Var(_) => Ok(()),
            Term::Const(c) => match vocab.operation_arity(c) {
                Some(0) => Ok(()),
                Some(n) => Err(SyntaxError::arity(c, n, 0)),
                None => Err(SyntaxError::UnknownSymbol(c.clone())),
            },
            Term::App(f, args) => {
                match vocab.operation_arity(f) {
                    Some(n) if n == args.len() => {}
                    Some(n) => return Err(SyntaxError::arity(f, n, args.len())),
                    None => return Err(SyntaxError::UnknownSymbol(f.clone())),
                }
                args.iter().try_for_each(|t| t.check(vocab))
            }
        }
    }

    fn collect_operations(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(_) => {}
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::App(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|t| t.collect_operations(out));
            }
        }
    }

    pub fn rename_symbols(&self, map: &BTreeMap<String, String>) -> Term {
        let rn = |s: &String| map.get(s).cloned().unwrap_or_else(|| s.clone());
        match self {
            Term::Var(_) => self.clone(),
            Term::Const(c) => Term::Const(rn(c)),
            Term::App(f, args) => Term::App(
                rn(f),
                args.iter().map(|t| t.rename_symbols(map)).collect(),
            ),
        }
    }
}

/// A formula of basic continuous logic.
///
/// The core node kinds are `Metric`, `Pred`, `Implies`, `Const` and
/// `Exists`. The remaining kinds are abbreviations that parsing may produce;
/// [`Formula::expand`] rewrites them into the core.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Metric(Term, Term),
    Pred(String, Vec<Term>),
    Implies(Box<Formula>, Box<Formula>),
    Const(Rational),
    Exists(String, Box<Formula>),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Leq(Box<Formula>, Rational),
    Geq(Box<Formula>, Rational),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn metric(a: Term, b: Term) -> Formula {
        Formula::Metric(a, b)
    }

    pub fn pred(name: &str, args: Vec<Term>) -> Formula {
        Formula::Pred(name.to_owned(), args)
    }

    pub fn constant(r: Rational) -> Formula {
        Formula::Const(r)
    }

    pub fn zero() -> Formula {
        Formula::Const(Rational::zero())
    }

    pub fn one() -> Formula {
        Formula::Const(Rational::one())
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_owned(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_owned(), Box::new(body))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn leq(a: Formula, r: Rational) -> Formula {
        Formula::Leq(Box::new(a), r)
    }

    pub fn geq(a: Formula, r: Rational) -> Formula {
        Formula::Geq(Box::new(a), r)
    }

    /// Left-nested disjunction; `Const 0` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or_else(Formula::zero)
    }

    /// Left-nested conjunction; `Const 1` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or_else(Formula::one)
    }

    /// `∃x1 ... ∃xn φ`.
    pub fn exists_many<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.as_ref(), acc))
    }

    /// `∀x1 ... ∀xn φ`.
    pub fn forall_many<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v.as_ref(), acc))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Metric(..) | Formula::Pred(..))
    }

    /// True when no abbreviation node occurs anywhere in the tree.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::Metric(..) | Formula::Pred(..) | Formula::Const(_) => true,
            Formula::Implies(a, b) => a.is_core() && b.is_core(),
            Formula::Exists(_, a) => a.is_core(),
            _ => false,
        }
    }

    /// Rewrites every abbreviation into core connectives:
    /// `¬φ = φ → 0`, `φ ∨ ψ = (φ → ψ) → ψ`, `φ ∧ ψ = ¬(¬φ ∨ ¬ψ)`,
    /// `φ ≤ r = φ → r`, `φ ≥ r = r → φ`, `∀xφ = ¬∃x¬φ`.
    pub fn expand(&self) -> Formula {
        match self {
            Formula::Metric(..) | Formula::Pred(..) | Formula::Const(_) => self.clone(),
            Formula::Implies(a, b) => Formula::implies(a.expand(), b.expand()),
            Formula::Exists(x, a) => Formula::exists(x, a.expand()),
            Formula::Not(a) => neg(a.expand()),
            Formula::Or(a, b) => disj(a.expand(), b.expand()),
            Formula::And(a, b) => neg(disj(neg(a.expand()), neg(b.expand()))),
            Formula::Leq(a, r) => Formula::implies(a.expand(), Formula::Const(r.clone())),
            Formula::Geq(a, r) => Formula::implies(Formula::Const(r.clone()), a.expand()),
            Formula::Forall(x, a) => neg(Formula::exists(x, neg(a.expand()))),
        }
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let push_terms = |terms: &[&Term], bound: &Vec<String>, out: &mut Vec<String>| {
            for t in terms {
                for v in t.variables() {
                    if !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        };
        match self {
            Formula::Metric(a, b) => push_terms(&[a, b], bound, out),
            Formula::Pred(_, args) => push_terms(&args.iter().collect::<Vec<_>>(), bound, out),
            Formula::Const(_) => {}
            Formula::Implies(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Not(a) | Formula::Leq(a, _) | Formula::Geq(a, _) => a.collect_free(bound, out),
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Metric(a, b) => out.extend(a.variables().into_iter().chain(b.variables())),
            Formula::Pred(_, args) => out.extend(args.iter().flat_map(Term::variables)),
            Formula::Exists(x, _) | Formula::Forall(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Metric(..) | Formula::Pred(..) | Formula::Const(_) => {}
            Formula::Implies(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Not(a)
            | Formula::Leq(a, _)
            | Formula::Geq(a, _)
            | Formula::Exists(_, a)
            | Formula::Forall(_, a) => a.visit(f),
        }
    }

    /// Predicate symbols used.
    pub fn predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Pred(p, _) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Operation and constant symbols used.
    pub fn operations(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Metric(a, b) => {
                a.collect_operations(&mut out);
                b.collect_operations(&mut out);
            }
            Formula::Pred(_, args) => args.iter().for_each(|t| t.collect_operations(&mut out)),
            _ => {}
        });
        out
    }

    /// All `Const` literal values.
    pub fn constants(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        self.visit(&mut |f| match f {
            Formula::Const(r) | Formula::Leq(_, r) | Formula::Geq(_, r) => out.push(r.clone()),
            _ => {}
        });
        out
    }

    /// Arity-correctness and literal range checks against `vocab`.
    pub fn check(&self, vocab: &Vocabulary) -> Result<(), SyntaxError> {
        let in_unit = |r: &Rational| *r >= Rational::zero() && *r <= Rational::one();
        match self {
            Formula::Metric(a, b) => {
                a.check(vocab)?;
                b.check(vocab)
            }
            Formula::Pred(p, args) => {
                match vocab.predicate_arity(p) {
                    Some(n) if n == args.len() => {}
                    Some(n) => return Err(SyntaxError::arity(p, n, args.len())),
                    None => return Err(SyntaxError::UnknownSymbol(p.clone())),
                }
                args.iter().try_for_each(|t| t.check(vocab))
            }
            Formula::Const(r) => {
                if in_unit(r) {
                    Ok(())
                } else {
                    Err(SyntaxError::ConstantOutOfRange(r.clone()))
                }
            }
            Formula::Leq(a, r) | Formula::Geq(a, r) => {
                if !in_unit(r) {
                    return Err(SyntaxError::ConstantOutOfRange(r.clone()));
                }
                a.check(vocab)
            }
            Formula::Implies(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                a.check(vocab)?;
                b.check(vocab)
            }
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.check(vocab),
        }
    }

    /// Capture-avoiding substitution of terms for free variables. Bound
    /// variables that would capture a variable of a substituted term are
    /// renamed to fresh names first.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Metric(a, b) => Formula::Metric(a.substitute(map), b.substitute(map)),
            Formula::Pred(p, args) => {
                Formula::Pred(p.clone(), args.iter().map(|t| t.substitute(map)).collect())
            }
            Formula::Const(_) => self.clone(),
            Formula::Implies(a, b) => Formula::implies(a.substitute(map), b.substitute(map)),
            Formula::Or(a, b) => Formula::or(a.substitute(map), b.substitute(map)),
            Formula::And(a, b) => Formula::and(a.substitute(map), b.substitute(map)),
            Formula::Not(a) => Formula::not(a.substitute(map)),
            Formula::Leq(a, r) => Formula::leq(a.substitute(map), r.clone()),
            Formula::Geq(a, r) => Formula::geq(a.substitute(map), r.clone()),
            Formula::Exists(x, a) => {
                let (x, a) = substitute_under_binder(x, a, map);
                Formula::exists(&x, a)
            }
            Formula::Forall(x, a) => {
                let (x, a) = substitute_under_binder(x, a, map);
                Formula::forall(&x, a)
            }
        }
    }

    /// Substitutes terms for the listed variables, positionally.
    pub fn instantiate(&self, vars: &[String], terms: &[Term]) -> Formula {
        let map = vars.iter().cloned().zip(terms.iter().cloned()).collect();
        self.substitute(&map)
    }

    /// Renames predicate and operation symbols (variables untouched).
    pub fn rename_symbols(&self, map: &BTreeMap<String, String>) -> Formula {
        let rn = |s: &String| map.get(s).cloned().unwrap_or_else(|| s.clone());
        match self {
            Formula::Metric(a, b) => Formula::Metric(a.rename_symbols(map), b.rename_symbols(map)),
            Formula::Pred(p, args) => Formula::Pred(
                rn(p),
                args.iter().map(|t| t.rename_symbols(map)).collect(),
            ),
            Formula::Const(_) => self.clone(),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_symbols(map), b.rename_symbols(map))
            }
            Formula::Or(a, b) => Formula::or(a.rename_symbols(map), b.rename_symbols(map)),
            Formula::And(a, b) => Formula::and(a.rename_symbols(map), b.rename_symbols(map)),
            Formula::Not(a) => Formula::not(a.rename_symbols(map)),
            Formula::Leq(a, r) => Formula::leq(a.rename_symbols(map), r.clone()),
            Formula::Geq(a, r) => Formula::geq(a.rename_symbols(map), r.clone()),
            Formula::Exists(x, a) => Formula::exists(x, a.rename_symbols(map)),
            Formula::Forall(x, a) => Formula::forall(x, a.rename_symbols(map)),
        }
    }

    /// Maximum nesting of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Metric(..) | Formula::Pred(..) | Formula::Const(_) => 0,
            Formula::Implies(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Not(a) | Formula::Leq(a, _) | Formula::Geq(a, _) => a.quantifier_depth(),
            Formula::Exists(_, a) | Formula::Forall(_, a) => 1 + a.quantifier_depth(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

fn neg(a: Formula) -> Formula {
    Formula::implies(a, Formula::zero())
}

fn disj(a: Formula, b: Formula) -> Formula {
    Formula::implies(Formula::implies(a, b.clone()), b)
}

fn substitute_under_binder(
    x: &str,
    body: &Formula,
    map: &BTreeMap<String, Term>,
) -> (String, Formula) {
    let mut inner: BTreeMap<String, Term> = map.clone();
    inner.remove(x);
    let free = body.free_variables();
    inner.retain(|k, _| free.contains(k));
    if inner.is_empty() {
        return (x.to_owned(), body.clone());
    }
    let captured = inner.values().any(|t| t.variables().iter().any(|v| v == x));
    if !captured {
        return (x.to_owned(), body.substitute(&inner));
    }
    let mut avoid: HashSet<String> = body.all_variables().into_iter().collect();
    for t in inner.values() {
        avoid.extend(t.variables());
    }
    avoid.extend(inner.keys().cloned());
    let fresh = fresh_variable(x, &avoid);
    let mut renamed = BTreeMap::new();
    renamed.insert(x.to_owned(), Term::Var(fresh.clone()));
    let body = body.substitute(&renamed);
    (fresh, body.substitute(&inner))
}

/// A variable name derived from `base` that is not in `avoid`.
pub fn fresh_variable(base: &str, avoid: &HashSet<String>) -> String {
    if !avoid.contains(base) && !super::vocabulary::RESERVED.contains(&base) {
        return base.to_owned();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|c| !avoid.contains(c))
        .expect("unbounded candidate stream")
}
