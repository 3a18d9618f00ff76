//! Formula-to-formula constructions: the discreteness macro, relativization
//! to a predicate or a definable family, the discrete linear ordering
//! theory, and thickening of types. Also the matching structure
//! restrictions.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::scalar::{format_rational, Scalar};
use crate::structures::{Structure, StructureError};
use crate::syntax::{
    fresh_variable, is_identifier, render, Formula, SyntaxError, Term, Theory, TypeSet, Vocabulary,
    RESERVED,
};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("`{0}` is not an atomic predicate application")]
    NotAtomic(String),
    #[error("`{0}` already occurs in the formula")]
    SymbolOccurs(String),
    #[error("name clash: `{0}`")]
    NameClash(String),
    #[error("threshold {} lies outside [0,1]", format_rational(.0))]
    OutOfRange(Rational),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RestrictError {
    #[error("`{0}` is not a predicate of the structure with the required arity")]
    UnknownPredicate(String),
    #[error("`{predicate}` is not discrete: value {} at ({})", format_rational(.value), .at.join(","))]
    NotDiscrete {
        predicate: String,
        at: Vec<String>,
        value: Rational,
    },
    #[error("the restriction to `{0}` is empty")]
    Empty(String),
    #[error("constant `{constant}` lies outside the restriction to `{predicate}`")]
    ConstantOutside { predicate: String, constant: String },
    #[error("operation `{operation}` leaves the restriction to `{predicate}`")]
    NotClosed { predicate: String, operation: String },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// `Discrete(φ) = φ ∨ ¬φ`, which is 1 exactly when `φ` is 0 or 1.
pub fn discrete_macro(atom: &Formula) -> Result<Formula, TransformError> {
    if !atom.is_atomic() {
        return Err(TransformError::NotAtomic(render(atom)));
    }
    Ok(discrete(atom.clone()))
}

fn discrete(f: Formula) -> Formula {
    Formula::or(f.clone(), Formula::not(f))
}

fn mentions(f: &Formula, symbol: &str) -> bool {
    f.predicates().contains(symbol) || f.operations().contains(symbol)
}

/// Rewrites quantifiers with the guard `guard(x)`:
/// `∃xψ ↦ ∃x(G(x) ∧ ψ)` and `∀xψ ↦ ∀x(¬G(x) ∨ ψ)`.
fn guarded(f: &Formula, guard: &dyn Fn(&str) -> Formula) -> Formula {
    let go = |g: &Formula| guarded(g, guard);
    match f {
        Formula::Metric(..) | Formula::Pred(..) | Formula::Const(_) => f.clone(),
        Formula::Implies(a, b) => Formula::implies(go(a), go(b)),
        Formula::Or(a, b) => Formula::or(go(a), go(b)),
        Formula::And(a, b) => Formula::and(go(a), go(b)),
        Formula::Not(a) => Formula::not(go(a)),
        Formula::Leq(a, r) => Formula::leq(go(a), r.clone()),
        Formula::Geq(a, r) => Formula::geq(go(a), r.clone()),
        Formula::Exists(x, a) => Formula::exists(x, Formula::and(guard(x), go(a))),
        Formula::Forall(x, a) => Formula::forall(x, Formula::or(Formula::not(guard(x)), go(a))),
    }
}

/// `φ^P`: every quantifier restricted to the positive part of `P`.
pub fn relativize_monadic(f: &Formula, predicate: &str) -> Result<Formula, TransformError> {
    if mentions(f, predicate) {
        return Err(TransformError::SymbolOccurs(predicate.to_owned()));
    }
    Ok(guarded(f, &|x| Formula::pred(predicate, vec![Term::var(x)])))
}

/// `φ^{y | R(x,y)}(x)` for a sentence `φ`. Returns the formula and its free
/// parameter variable (`x` unless `φ` already uses that name).
pub fn relativize_family(f: &Formula, relation: &str) -> Result<(Formula, String), TransformError> {
    let avoid: HashSet<String> = f.all_variables().into_iter().collect();
    let param = fresh_variable("x", &avoid);
    Ok((relativize_family_with(f, relation, &param)?, param))
}

/// As [`relativize_family`] with a chosen parameter name, which must not
/// occur in `φ`.
pub fn relativize_family_with(f: &Formula, relation: &str, param: &str) -> Result<Formula, TransformError> {
    if mentions(f, relation) {
        return Err(TransformError::SymbolOccurs(relation.to_owned()));
    }
    if !f.is_sentence() {
        return Err(SyntaxError::NotASentence(render(f), f.free_variables()).into());
    }
    if f.all_variables().contains(param) {
        return Err(TransformError::NameClash(param.to_owned()));
    }
    Ok(guarded(f, &|y| {
        Formula::pred(relation, vec![Term::var(param), Term::var(y)])
    }))
}

fn restrict_to_set<T: Scalar>(
    m: &Structure<T>,
    label: &str,
    values: &[T],
    at: impl Fn(usize) -> Vec<String>,
) -> Result<Structure<T>, RestrictError> {
    let mut keep = Vec::new();
    for (a, v) in values.iter().enumerate() {
        if v.is_one() {
            keep.push(a);
        } else if !v.is_zero() {
            return Err(RestrictError::NotDiscrete {
                predicate: label.to_owned(),
                at: at(a),
                value: v.to_rational().unwrap_or_default(),
            });
        }
    }
    if keep.is_empty() {
        return Err(RestrictError::Empty(label.to_owned()));
    }
    let inside = |a: usize| keep.binary_search(&a).is_ok();
    for (c, &a) in m.constants() {
        if !inside(a) {
            return Err(RestrictError::ConstantOutside {
                predicate: label.to_owned(),
                constant: c.clone(),
            });
        }
    }
    match m.induced(&keep) {
        Err(StructureError::NotClosed(_, op)) => Err(RestrictError::NotClosed {
            predicate: label.to_owned(),
            operation: op,
        }),
        other => Ok(other?),
    }
}

/// `M ↾ {x | P(x)}` with `P` dropped. Defined only when `P` is discrete,
/// its positive part is nonempty, holds every constant and is closed under
/// every operation.
pub fn restrict_to_predicate<T: Scalar>(m: &Structure<T>, predicate: &str) -> Result<Structure<T>, RestrictError> {
    let table = m
        .predicate(predicate)
        .filter(|t| t.arity == 1)
        .ok_or_else(|| RestrictError::UnknownPredicate(predicate.to_owned()))?;
    let mut out = restrict_to_set(m, predicate, &table.values, |a| vec![m.element_name(a).to_owned()])?;
    out.remove_symbol(predicate);
    Ok(out)
}

/// `M ↾ {y | R(a,y)}` with `R` dropped.
pub fn restrict_to_family<T: Scalar>(
    m: &Structure<T>,
    relation: &str,
    a: usize,
) -> Result<Structure<T>, RestrictError> {
    let table = m
        .predicate(relation)
        .filter(|t| t.arity == 2)
        .ok_or_else(|| RestrictError::UnknownPredicate(relation.to_owned()))?;
    if a >= m.size() {
        return Err(StructureError::ElementOutOfRange(a).into());
    }
    let n = m.size();
    let row = &table.values[a * n..(a + 1) * n];
    let label = format!("{relation}({},·)", m.element_name(a));
    let mut out = restrict_to_set(m, &label, row, |b| {
        vec![m.element_name(a).to_owned(), m.element_name(b).to_owned()]
    })?;
    out.remove_symbol(relation);
    Ok(out)
}

/// Names for the discrete linear ordering theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderTheorySpec {
    /// The monadic predicate carrying the order.
    pub domain: String,
    /// The binary predicate read as strict order.
    pub less: String,
}

impl OrderTheorySpec {
    pub fn new(domain: &str, less: &str) -> Self {
        OrderTheorySpec {
            domain: domain.to_owned(),
            less: less.to_owned(),
        }
    }

    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::new();
        v.predicates.insert(self.domain.clone(), 1);
        v.predicates.insert(self.less.clone(), 2);
        v
    }
}

/// The seven sentences saying `(P, ◁)` is a discrete linear ordering,
/// expanded to core connectives. `base` is the vocabulary the names must be
/// fresh for.
pub fn order_theory(spec: &OrderTheorySpec, base: &Vocabulary) -> Result<Theory, TransformError> {
    for name in [&spec.domain, &spec.less] {
        if !is_identifier(name) || RESERVED.contains(&name.as_str()) || base.contains(name) {
            return Err(TransformError::NameClash(name.clone()));
        }
    }
    if spec.domain == spec.less {
        return Err(TransformError::NameClash(spec.domain.clone()));
    }
    Ok(Theory::new("theta", order_sentences(spec).iter().map(Formula::expand).collect())?)
}

/// The seven sentences before expansion, in order.
pub fn order_sentences(spec: &OrderTheorySpec) -> Vec<Formula> {
    let v = Term::var;
    let p = |x: &str| Formula::pred(&spec.domain, vec![v(x)]);
    let lt = |x: &str, y: &str| Formula::pred(&spec.less, vec![v(x), v(y)]);
    let np = |x: &str| Formula::not(p(x));
    let d = |x: &str, y: &str| Formula::metric(v(x), v(y));
    let or3 = |a, b, c| Formula::or(Formula::or(a, b), c);
    vec![
        Formula::forall("x", discrete(p("x"))),
        Formula::forall_many(&["x", "y"], or3(np("x"), np("y"), discrete(lt("x", "y")))),
        Formula::forall_many(&["x", "y"], or3(np("x"), np("y"), discrete(d("x", "y")))),
        Formula::forall("x", Formula::or(np("x"), Formula::not(lt("x", "x")))),
        Formula::forall_many(
            &["x", "y"],
            Formula::or(
                Formula::not(Formula::and_all([p("x"), p("y"), lt("x", "y")])),
                Formula::not(lt("y", "x")),
            ),
        ),
        Formula::forall_many(
            &["x", "y", "z"],
            Formula::or(
                Formula::not(Formula::and_all([p("x"), p("y"), lt("x", "y"), lt("y", "z")])),
                lt("x", "z"),
            ),
        ),
        Formula::forall_many(
            &["x", "y"],
            Formula::or(
                Formula::not(Formula::and(p("x"), p("y"))),
                or3(lt("x", "y"), lt("y", "x"), Formula::not(d("x", "y"))),
            ),
        ),
    ]
}

/// Limits for [`thicken`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThickenOptions {
    /// Largest conjunction size enumerated; `None` means `|Σ|`.
    pub max_conjunction: Option<usize>,
    /// Cap on the number of subset conjunctions; the full conjunction is
    /// always included on top of these.
    pub max_formulas: usize,
}

impl Default for ThickenOptions {
    fn default() -> Self {
        ThickenOptions {
            max_conjunction: None,
            max_formulas: 4096,
        }
    }
}

/// `Σ^δ`: for each enumerated conjunction `σ` of members of `Σ`, the
/// formula `∃ȳ(⋀_k d(x_k,y_k) ≤ δ ∧ σ(ȳ))`. Subsets are taken by size and
/// then lexicographically by position; the full conjunction is always
/// present. An empty `Σ` gives the single formula with `σ = 1`.
pub fn thicken(sigma: &TypeSet, delta: &Rational, options: &ThickenOptions) -> Result<TypeSet, TransformError> {
    if *delta < Rational::from_integer(0.into()) || *delta > Rational::from_integer(1.into()) {
        return Err(TransformError::OutOfRange(delta.clone()));
    }
    let mut avoid: HashSet<String> = sigma.variables.iter().cloned().collect();
    for f in &sigma.formulas {
        avoid.extend(f.all_variables());
    }
    let ys: Vec<String> = sigma
        .variables
        .iter()
        .map(|_| {
            let y = fresh_variable("y", &avoid);
            avoid.insert(y.clone());
            y
        })
        .collect();
    let rename: BTreeMap<String, Term> = sigma
        .variables
        .iter()
        .cloned()
        .zip(ys.iter().map(|y| Term::var(y)))
        .collect();
    let shifted: Vec<Formula> = sigma.formulas.iter().map(|f| f.substitute(&rename)).collect();
    let close = Formula::and_all(
        sigma
            .variables
            .iter()
            .zip(&ys)
            .map(|(x, y)| Formula::leq(Formula::metric(Term::var(x), Term::var(y)), delta.clone())),
    );
    let wrap = |members: &[usize]| {
        let conj = Formula::and_all(members.iter().map(|&i| shifted[i].clone()));
        Formula::exists_many(&ys, Formula::and(close.clone(), conj))
    };
    let n = shifted.len();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let largest = options.max_conjunction.unwrap_or(n).min(n);
    'sizes: for size in 1..=largest {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if subsets.len() >= options.max_formulas {
                break 'sizes;
            }
            subsets.push(combo.clone());
            // Next combination in lexicographic order.
            let mut i = size;
            loop {
                if i == 0 {
                    continue 'sizes;
                }
                i -= 1;
                if combo[i] < n - size + i {
                    break;
                }
            }
            combo[i] += 1;
            for j in i + 1..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    let full: Vec<usize> = (0..n).collect();
    if !subsets.contains(&full) {
        subsets.push(full);
    }
    let formulas = subsets.iter().map(|s| wrap(s)).collect();
    Ok(TypeSet::new(
        &format!("{}^{}", sigma.name, format_rational(delta)),
        sigma.variables.clone(),
        formulas,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{eval, eval_tuple, satisfies, Assignment};
    use crate::scalar::ratio;
    use crate::structures::combine;
    use num_traits::One;
    use crate::syntax::parse_formula;

    fn vocab() -> Vocabulary {
        Vocabulary::new()
            .with_predicate("Q", 1)
            .unwrap()
            .with_predicate("P", 1)
            .unwrap()
    }

    fn parse(text: &str) -> Formula {
        parse_formula(text, &vocab()).unwrap()
    }

    fn sample() -> Structure {
        let mut m = Structure::discrete(&["a", "b", "c"]).unwrap();
        m.add_predicate("Q", 1, vec![ratio(1, 3), ratio(1, 1), ratio(1, 2)]).unwrap();
        m.add_predicate("P", 1, vec![ratio(1, 1), ratio(0, 1), ratio(1, 1)]).unwrap();
        m
    }

    #[test]
    fn discrete_macro_values() {
        let mut m: Structure = Structure::discrete(&["a", "b"]).unwrap();
        m.add_predicate("Q", 1, vec![ratio(1, 1), ratio(1, 3)]).unwrap();
        let f = discrete_macro(&parse("Q(x)")).unwrap();
        let at = |a| eval(&m, &f, &Assignment::from([("x".into(), a)])).unwrap();
        assert_eq!(at(0), ratio(1, 1));
        assert_eq!(at(1), ratio(2, 3));
        assert!(discrete_macro(&parse("~Q(x)")).is_err());
        assert!(!satisfies(&m, &Formula::forall("x", f.clone())).unwrap());
    }

    #[test]
    fn monadic_relativization_matches_restriction() {
        let m = sample();
        let restricted = restrict_to_predicate(&m, "P").unwrap();
        assert_eq!(restricted.size(), 2);
        for text in ["E x. Q(x)", "A x. Q(x)", "A x. E y. (Q(x) -> Q(y)) /\\ d(x,y) <= 1/2", "1/3"] {
            let f = parse(text);
            let rel = relativize_monadic(&f, "P").unwrap();
            assert_eq!(
                eval(&m, &rel, &Assignment::new()).unwrap(),
                eval(&restricted, &f, &Assignment::new()).unwrap(),
                "{text}"
            );
        }
        assert!(relativize_monadic(&parse("E x. P(x)"), "P").is_err());
        assert_eq!(relativize_monadic(&parse("1/3"), "P").unwrap(), parse("1/3"));
    }

    #[test]
    fn restriction_errors_are_distinct() {
        let mut m = sample();
        m.add_predicate("H", 1, vec![ratio(1, 2), ratio(1, 1), ratio(0, 1)]).unwrap();
        m.add_predicate("Z", 1, vec![ratio(0, 1); 3]).unwrap();
        assert!(matches!(restrict_to_predicate(&m, "H"), Err(RestrictError::NotDiscrete { .. })));
        assert!(matches!(restrict_to_predicate(&m, "Z"), Err(RestrictError::Empty(_))));
        m.add_operation_fn("s", 1, |t| (t[0] + 1) % 3).unwrap();
        assert!(matches!(restrict_to_predicate(&m, "P"), Err(RestrictError::NotClosed { .. })));
        let mut c = sample();
        c.add_constant("k", 1).unwrap();
        assert!(matches!(
            restrict_to_predicate(&c, "P"),
            Err(RestrictError::ConstantOutside { .. })
        ));
    }

    #[test]
    fn combined_parts_reproduce_components() {
        let mut m0: Structure = Structure::discrete(&["a", "b"]).unwrap();
        m0.set_distance(0, 1, ratio(1, 2)).unwrap();
        m0.add_predicate("Q", 1, vec![ratio(1, 4), ratio(3, 4)]).unwrap();
        let mut m1: Structure = Structure::discrete(&["c"]).unwrap();
        m1.add_predicate("Q", 1, vec![ratio(1, 5)]).unwrap();
        let c = combine(&m0, &m1).unwrap();
        let v = Vocabulary::new().with_predicate("Q", 1).unwrap();
        let f = parse_formula("E x. A y. Q(y) -> Q(x) /\\ d(x,y) <= 1/2", &v).unwrap();
        for (k, mk) in [(0, &m0), (1, &m1)] {
            let renamed = c.renamings[k].apply_formula(&f);
            let rel = relativize_monadic(&renamed, &c.parts[k]).unwrap();
            assert_eq!(
                eval(&c.structure, &rel, &Assignment::new()).unwrap(),
                eval(mk, &f, &Assignment::new()).unwrap()
            );
        }
    }

    #[test]
    fn family_relativization() {
        let mut m: Structure = Structure::discrete(&["a", "b", "c"]).unwrap();
        m.add_predicate("Q", 1, vec![ratio(1, 3), ratio(1, 1), ratio(1, 2)]).unwrap();
        // R(a,·) = {a,c}, R(b,·) = everything, R(c,·) = nothing.
        let one = ratio(1, 1);
        let zero = ratio(0, 1);
        m.add_predicate(
            "R",
            2,
            vec![
                one.clone(),
                zero.clone(),
                one.clone(),
                one.clone(),
                one.clone(),
                one.clone(),
                zero.clone(),
                zero.clone(),
                zero,
            ],
        )
        .unwrap();
        let f = parse("A x. Q(x) <= 1/2");
        let (rel, param) = relativize_family(&f, "R").unwrap();
        assert_ne!(param, "x");
        assert_eq!(rel.free_variables(), vec![param.clone()]);
        for a in 0..2 {
            let sub = restrict_to_family(&m, "R", a).unwrap();
            assert_eq!(
                eval_tuple(&m, &rel, std::slice::from_ref(&param), &[a]).unwrap(),
                eval(&sub, &f, &Assignment::new()).unwrap()
            );
        }
        assert!(matches!(restrict_to_family(&m, "R", 2), Err(RestrictError::Empty(_))));
    }

    fn order_structure(pairs: &[(usize, usize)], p: Rational) -> Structure {
        let mut m = Structure::discrete(&["p", "q"]).unwrap();
        m.add_predicate("P", 1, vec![p.clone(), p]).unwrap();
        m.add_predicate_fn("LT", 2, |t| {
            if pairs.contains(&(t[0], t[1])) {
                ratio(1, 1)
            } else {
                ratio(0, 1)
            }
        })
        .unwrap();
        m
    }

    #[test]
    fn order_theory_examples() {
        let spec = OrderTheorySpec::new("P", "LT");
        let theta = order_theory(&spec, &Vocabulary::new()).unwrap();
        assert_eq!(theta.len(), 7);
        assert!(theta.sentences.iter().all(Formula::is_core));
        let good = order_structure(&[(0, 1)], ratio(1, 1));
        for s in &theta.sentences {
            assert!(satisfies(&good, s).unwrap());
        }
        let reflexive = order_structure(&[(0, 1), (0, 0)], ratio(1, 1));
        let v = eval(&reflexive, &theta.sentences[3], &Assignment::new()).unwrap();
        assert_eq!(v, ratio(0, 1));
        let empty = order_structure(&[(0, 0), (1, 0), (0, 1)], ratio(0, 1));
        for s in &theta.sentences {
            assert!(satisfies(&empty, s).unwrap());
        }
        assert!(order_theory(&spec, &vocab()).is_err());
        assert!(order_theory(&OrderTheorySpec::new("P", "P"), &Vocabulary::new()).is_err());
    }

    #[test]
    fn thicken_shapes() {
        let x = vec!["x".to_string()];
        let empty = TypeSet::new("S", x.clone(), vec![]).unwrap();
        let t = thicken(&empty, &ratio(1, 2), &ThickenOptions::default()).unwrap();
        assert_eq!(t.formulas.len(), 1);
        let three = TypeSet::new("S", x.clone(), vec![parse("Q(x)"), parse("P(x)"), parse("Q(x) <= 1/2")]).unwrap();
        let t = thicken(&three, &ratio(0, 1), &ThickenOptions::default()).unwrap();
        assert_eq!(t.formulas.len(), 7);
        assert!(t.formulas.iter().all(|f| f.free_variables() == x));
        let capped = ThickenOptions {
            max_conjunction: Some(1),
            max_formulas: 2,
        };
        assert_eq!(thicken(&three, &ratio(0, 1), &capped).unwrap().formulas.len(), 3);
        assert!(thicken(&three, &ratio(3, 2), &ThickenOptions::default()).is_err());
    }

    #[test]
    fn thicken_zero_on_discrete_metric() {
        let m = sample();
        let x = vec!["x".to_string()];
        let sigma = TypeSet::new("S", x.clone(), vec![parse("P(x)")]).unwrap();
        let t = thicken(&sigma, &ratio(0, 1), &ThickenOptions::default()).unwrap();
        for a in 0..3 {
            let realizes = |s: &TypeSet| {
                s.formulas
                    .iter()
                    .all(|f| eval_tuple(&m, f, &x, &[a]).unwrap().is_one())
            };
            assert_eq!(realizes(&sigma), realizes(&t));
        }
    }
}
