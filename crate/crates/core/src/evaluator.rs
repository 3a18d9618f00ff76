//! Exact truth values, satisfaction, theory checking, finite-family
//! entailment and a finite Tarski-Vaught test.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::scalar::{implies, Scalar};
use crate::structures::{tuple_index, tuples, OperationTable, PredicateTable, Structure};
use crate::syntax::{render, Formula, Term, Theory, TypeSet};
use crate::Rational;

/// Free-variable name to element index.
pub type Assignment = BTreeMap<String, usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("free variable `{0}` has no value")]
    Unassigned(String),
    #[error("symbol `{0}` is not interpreted in the structure")]
    UnknownSymbol(String),
    #[error("`{symbol}` has arity {expected}, used with {found} argument(s)")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element index {0} out of range")]
    ElementOutOfRange(usize),
    #[error("constant {0} is not representable in the scalar type")]
    Unrepresentable(String),
    #[error("`{0}` is not a sentence")]
    NotASentence(String),
    #[error("types range over different variables: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),
    #[error("{0}")]
    Malformed(String),
}

enum CTerm<'m> {
    Slot(usize),
    Elem(usize),
    App(&'m OperationTable, Vec<CTerm<'m>>),
}

enum Node<'m, T> {
    Metric(CTerm<'m>, CTerm<'m>),
    Pred(&'m PredicateTable<T>, Vec<CTerm<'m>>),
    Implies(usize, usize),
    Const(T),
    Exists {
        slot: usize,
        body: usize,
        /// Slots the body reads other than `slot`.
        free: Vec<usize>,
        /// Whether `n^|free|` fits in a memo key.
        memo: bool,
    },
}

/// A formula compiled against one structure.
struct Program<'m, T> {
    m: &'m Structure<T>,
    nodes: Vec<Node<'m, T>>,
    root: usize,
    slots: usize,
}

struct Compiler<'m, T> {
    m: &'m Structure<T>,
    nodes: Vec<Node<'m, T>>,
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl<'m, T: Scalar> Compiler<'m, T> {
    fn lookup(&self, v: &str) -> Result<usize, EvalError> {
        self.scope
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|&(_, s)| s)
            .ok_or_else(|| EvalError::Unassigned(v.to_owned()))
    }

    fn term(&self, t: &Term, reads: &mut Vec<usize>) -> Result<CTerm<'m>, EvalError> {
        match t {
            Term::Var(v) => {
                let s = self.lookup(v)?;
                if !reads.contains(&s) {
                    reads.push(s);
                }
                Ok(CTerm::Slot(s))
            }
            Term::Const(c) => self
                .m
                .constant(c)
                .map(CTerm::Elem)
                .ok_or_else(|| EvalError::UnknownSymbol(c.clone())),
            Term::App(f, args) => {
                let table = self
                    .m
                    .operation(f)
                    .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
                if table.arity != args.len() {
                    return Err(EvalError::Arity {
                        symbol: f.clone(),
                        expected: table.arity,
                        found: args.len(),
                    });
                }
                let args = args
                    .iter()
                    .map(|a| self.term(a, reads))
                    .collect::<Result<_, _>>()?;
                Ok(CTerm::App(table, args))
            }
        }
    }

    fn push(&mut self, node: Node<'m, T>) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Compiles a core formula; `reads` collects the slots it depends on.
    fn formula(&mut self, f: &Formula, reads: &mut Vec<usize>) -> Result<usize, EvalError> {
        match f {
            Formula::Metric(a, b) => {
                let node = Node::Metric(self.term(a, reads)?, self.term(b, reads)?);
                Ok(self.push(node))
            }
            Formula::Pred(p, args) => {
                let table = self
                    .m
                    .predicate(p)
                    .ok_or_else(|| EvalError::UnknownSymbol(p.clone()))?;
                if table.arity != args.len() {
                    return Err(EvalError::Arity {
                        symbol: p.clone(),
                        expected: table.arity,
                        found: args.len(),
                    });
                }
                let args = args
                    .iter()
                    .map(|a| self.term(a, reads))
                    .collect::<Result<_, _>>()?;
                Ok(self.push(Node::Pred(table, args)))
            }
            Formula::Const(r) => {
                let v = T::from_rational(r)
                    .ok_or_else(|| EvalError::Unrepresentable(crate::scalar::format_rational(r)))?;
                Ok(self.push(Node::Const(v)))
            }
            Formula::Implies(a, b) => {
                let a = self.formula(a, reads)?;
                let b = self.formula(b, reads)?;
                Ok(self.push(Node::Implies(a, b)))
            }
            Formula::Exists(x, body) => {
                let slot = self.scope.len();
                self.slots = self.slots.max(slot + 1);
                self.scope.push((x.clone(), slot));
                let mut inner = Vec::new();
                let body = self.formula(body, &mut inner);
                self.scope.pop();
                let body = body?;
                let free: Vec<usize> = inner.into_iter().filter(|&s| s != slot).collect();
                for &s in &free {
                    if !reads.contains(&s) {
                        reads.push(s);
                    }
                }
                let n = self.m.size() as u64;
                let memo = !free.is_empty()
                    && u32::try_from(free.len())
                        .ok()
                        .and_then(|k| n.checked_pow(k))
                        .is_some();
                Ok(self.push(Node::Exists {
                    slot,
                    body,
                    free,
                    memo,
                }))
            }
            _ => self.formula(&f.expand(), reads),
        }
    }
}

impl<'m, T: Scalar> Program<'m, T> {
    fn compile(m: &'m Structure<T>, f: &Formula, free: &[String]) -> Result<Self, EvalError> {
        let mut c = Compiler {
            m,
            nodes: Vec::new(),
            scope: free.iter().cloned().zip(0..).collect(),
            slots: free.len(),
        };
        let core = f.expand();
        let root = c.formula(&core, &mut Vec::new())?;
        Ok(Program {
            m,
            nodes: c.nodes,
            root,
            slots: c.slots,
        })
    }

    fn term(&self, t: &CTerm<'m>, env: &[usize]) -> usize {
        match t {
            CTerm::Slot(s) => env[*s],
            CTerm::Elem(a) => *a,
            CTerm::App(table, args) => {
                let n = self.m.size();
                let idx = args
                    .iter()
                    .fold(0, |acc, a| acc * n + self.term(a, env));
                table.values[idx]
            }
        }
    }

    fn value(&self, id: usize, env: &mut Vec<usize>, memo: &mut HashMap<(usize, u64), T>) -> T {
        match &self.nodes[id] {
            Node::Metric(a, b) => self.m.distance(self.term(a, env), self.term(b, env)).clone(),
            Node::Pred(table, args) => {
                let n = self.m.size();
                let idx = args
                    .iter()
                    .fold(0, |acc, a| acc * n + self.term(a, env));
                table.values[idx].clone()
            }
            Node::Const(v) => v.clone(),
            Node::Implies(a, b) => {
                let va = self.value(*a, env, memo);
                if va.is_zero() {
                    return T::one();
                }
                let vb = self.value(*b, env, memo);
                implies(&va, &vb)
            }
            Node::Exists {
                slot,
                body,
                free,
                memo: use_memo,
            } => {
                let key = if *use_memo {
                    let n = self.m.size() as u64;
                    let k = free.iter().fold(0u64, |acc, &s| acc * n + env[s] as u64);
                    if let Some(v) = memo.get(&(id, k)) {
                        return v.clone();
                    }
                    Some(k)
                } else {
                    None
                };
                let saved = env[*slot];
                let mut best = T::zero();
                for a in 0..self.m.size() {
                    env[*slot] = a;
                    let v = self.value(*body, env, memo);
                    if v > best {
                        best = v;
                        if best.is_one() {
                            break;
                        }
                    }
                }
                env[*slot] = saved;
                if let Some(k) = key {
                    memo.insert((id, k), best.clone());
                }
                best
            }
        }
    }

    fn run(&self, values: &[usize]) -> T {
        let mut env = vec![0; self.slots.max(1)];
        env[..values.len()].copy_from_slice(values);
        self.value(self.root, &mut env, &mut HashMap::new())
    }
}

/// Reusable evaluation against one structure.
pub struct Evaluator<'m, T> {
    m: &'m Structure<T>,
}

impl<'m, T: Scalar> Evaluator<'m, T> {
    pub fn new(m: &'m Structure<T>) -> Self {
        Evaluator { m }
    }

    pub fn structure(&self) -> &'m Structure<T> {
        self.m
    }

    /// `φ^M[σ]`; abbreviations are expanded first.
    pub fn eval(&self, f: &Formula, sigma: &Assignment) -> Result<T, EvalError> {
        let vars: Vec<String> = f.free_variables();
        let mut tuple = Vec::with_capacity(vars.len());
        for v in &vars {
            let a = *sigma.get(v).ok_or_else(|| EvalError::Unassigned(v.clone()))?;
            tuple.push(a);
        }
        self.eval_tuple(f, &vars, &tuple)
    }

    /// `φ^M[ā]` with `vars[i]` interpreted by `tuple[i]`.
    pub fn eval_tuple(&self, f: &Formula, vars: &[String], tuple: &[usize]) -> Result<T, EvalError> {
        if vars.len() != tuple.len() {
            return Err(EvalError::Malformed(format!(
                "{} variables but {} elements",
                vars.len(),
                tuple.len()
            )));
        }
        if let Some(&bad) = tuple.iter().find(|&&a| a >= self.m.size()) {
            return Err(EvalError::ElementOutOfRange(bad));
        }
        Ok(Program::compile(self.m, f, vars)?.run(tuple))
    }

    /// Values of `φ` on every tuple over `vars`, lexicographically.
    pub fn eval_all(&self, f: &Formula, vars: &[String]) -> Result<Vec<T>, EvalError> {
        let program = Program::compile(self.m, f, vars)?;
        Ok(tuples(self.m.size(), vars.len())
            .map(|t| program.run(&t))
            .collect())
    }

    pub fn sentence(&self, f: &Formula) -> Result<T, EvalError> {
        if !f.is_sentence() {
            return Err(EvalError::NotASentence(render(f)));
        }
        self.eval_tuple(f, &[], &[])
    }
}

pub fn eval<T: Scalar>(m: &Structure<T>, f: &Formula, sigma: &Assignment) -> Result<T, EvalError> {
    Evaluator::new(m).eval(f, sigma)
}

pub fn eval_tuple<T: Scalar>(
    m: &Structure<T>,
    f: &Formula,
    vars: &[String],
    tuple: &[usize],
) -> Result<T, EvalError> {
    Evaluator::new(m).eval_tuple(f, vars, tuple)
}

/// `M ⊨ φ`: the value is exactly 1.
pub fn satisfies<T: Scalar>(m: &Structure<T>, f: &Formula) -> Result<bool, EvalError> {
    Ok(Evaluator::new(m).sentence(f)?.is_one())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryReport<T> {
    pub satisfied: bool,
    /// Each sentence with value below 1, in theory order.
    pub failing: Vec<(Formula, T)>,
}

pub fn check_theory<T: Scalar>(m: &Structure<T>, theory: &Theory) -> Result<TheoryReport<T>, EvalError> {
    let ev = Evaluator::new(m);
    let mut failing = Vec::new();
    for s in &theory.sentences {
        let v = ev.sentence(s)?;
        if !v.is_one() {
            failing.push((s.clone(), v));
        }
    }
    Ok(TheoryReport {
        satisfied: failing.is_empty(),
        failing,
    })
}

/// Whether `ā` makes every formula of the type equal 1. Returns the first
/// failing formula and its value otherwise.
pub fn first_unrealized<T: Scalar>(
    m: &Structure<T>,
    set: &TypeSet,
    tuple: &[usize],
) -> Result<Option<(Formula, T)>, EvalError> {
    let ev = Evaluator::new(m);
    for f in &set.formulas {
        let v = ev.eval_tuple(f, &set.variables, tuple)?;
        if !v.is_one() {
            return Ok(Some((f.clone(), v)));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample<T> {
    /// Position of the structure in the family.
    pub structure: usize,
    pub tuple: Vec<usize>,
    pub formula: Formula,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entailment<T> {
    pub holds: bool,
    pub counterexample: Option<Counterexample<T>>,
}

/// Finite-family semantic entailment: every realization of `Γ` in a model
/// of `T` from `family` realizes `Σ`.
pub fn entails<T: Scalar>(
    family: &[Structure<T>],
    theory: &Theory,
    gamma: &TypeSet,
    sigma: &TypeSet,
) -> Result<Entailment<T>, EvalError> {
    if gamma.variables != sigma.variables {
        return Err(EvalError::VariableMismatch(
            gamma.variables.clone(),
            sigma.variables.clone(),
        ));
    }
    for (i, m) in family.iter().enumerate() {
        if !check_theory(m, theory)?.satisfied {
            continue;
        }
        let ev = Evaluator::new(m);
        let gammas: Vec<Vec<T>> = gamma
            .formulas
            .iter()
            .map(|f| ev.eval_all(f, &gamma.variables))
            .collect::<Result<_, _>>()?;
        let sigmas: Vec<Vec<T>> = sigma
            .formulas
            .iter()
            .map(|f| ev.eval_all(f, &sigma.variables))
            .collect::<Result<_, _>>()?;
        for t in tuples(m.size(), gamma.arity()) {
            let k = tuple_index(m.size(), &t);
            if !gammas.iter().all(|vals| vals[k].is_one()) {
                continue;
            }
            if let Some(j) = sigmas.iter().position(|vals| !vals[k].is_one()) {
                return Ok(Entailment {
                    holds: false,
                    counterexample: Some(Counterexample {
                        structure: i,
                        tuple: t,
                        formula: sigma.formulas[j].clone(),
                        value: sigmas[j][k].clone(),
                    }),
                });
            }
        }
    }
    Ok(Entailment {
        holds: true,
        counterexample: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TvFailure<T> {
    pub formula: Formula,
    pub threshold: Rational,
    /// The best value `φ[a]` reaches over `A`.
    pub best: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TvReport<T> {
    pub passed: bool,
    pub failures: Vec<TvFailure<T>>,
}

/// For each formula `φ(x)` (which may use the names of elements of `subset`
/// as constants) and each `r` in `grid`: if `∃xφ` holds in `M`, some `a` in
/// `subset` must satisfy `φ[a] ≥ r`. A pass is a sound partial check only.
pub fn tarski_vaught_check<T: Scalar>(
    m: &Structure<T>,
    subset: &[usize],
    formulas: &[Formula],
    grid: &[Rational],
) -> Result<TvReport<T>, EvalError> {
    if let Some(&bad) = subset.iter().find(|&&a| a >= m.size()) {
        return Err(EvalError::ElementOutOfRange(bad));
    }
    for r in grid {
        if *r <= Rational::from_integer(0.into()) || *r >= Rational::from_integer(1.into()) {
            return Err(EvalError::Malformed(format!(
                "grid value {} is not in (0,1)",
                crate::scalar::format_rational(r)
            )));
        }
    }
    let mut named = m.clone();
    for &a in subset {
        let name = m.element_name(a).to_owned();
        if m.vocabulary().contains(&name) {
            continue;
        }
        named
            .add_constant(&name, a)
            .map_err(|e| EvalError::Malformed(e.to_string()))?;
    }
    let ev = Evaluator::new(&named);
    let mut failures = Vec::new();
    for f in formulas {
        let free = f.free_variables();
        if free.len() != 1 {
            return Err(EvalError::Malformed(format!(
                "`{}` must have exactly one free variable",
                render(f)
            )));
        }
        if !ev.sentence(&Formula::exists(&free[0], f.clone()))?.is_one() {
            continue;
        }
        let values = ev.eval_all(f, &free)?;
        for r in grid {
            let threshold = T::from_rational(r)
                .ok_or_else(|| EvalError::Unrepresentable(crate::scalar::format_rational(r)))?;
            let best = subset
                .iter()
                .map(|&a| values[a].clone())
                .fold(T::zero(), crate::scalar::max);
            if !implies(&threshold, &best).is_one() {
                failures.push(TvFailure {
                    formula: f.clone(),
                    threshold: r.clone(),
                    best,
                });
            }
        }
    }
    Ok(TvReport {
        passed: failures.is_empty(),
        failures,
    })
}
