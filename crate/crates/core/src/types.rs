//! Types over finite structures: realization and omission, principality
//! checks relative to an explicit family, a bounded model search that omits
//! types, and the distance between realized complete types.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::evaluator::{check_theory, entails, first_unrealized, Entailment, EvalError, Evaluator};
use crate::scalar::{format_rational, max, Scalar};
use crate::structures::{tuples, Structure, StructureError};
use crate::syntax::{fresh_variable, Formula, Signature, SyntaxError, Term, Theory, TypeSet};
use crate::transforms::{thicken, ThickenOptions, TransformError};
use crate::{Rational, SmallRational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypesError {
    #[error("tuple has {found} element(s), the type has {expected} variable(s)")]
    LengthMismatch { expected: usize, found: usize },
    #[error("types range over different variables: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),
    #[error("malformed terms: {0}")]
    MalformedTerms(String),
    #[error("constant {} cannot be represented on the grid with resolution {resolution}", format_rational(.constant))]
    Resolution { constant: Rational, resolution: u32 },
    #[error("no candidate given for δ = {}", format_rational(.0))]
    MissingCandidate(Rational),
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("the family is empty")]
    EmptyFamily,
    #[error("record refers to structure {0}, which is not in the family")]
    UnknownStructure(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

fn check_length(set: &TypeSet, tuple: &[usize]) -> Result<(), TypesError> {
    if tuple.len() != set.arity() {
        return Err(TypesError::LengthMismatch {
            expected: set.arity(),
            found: tuple.len(),
        });
    }
    Ok(())
}

/// Whether `ā` makes every member of `Σ` exactly 1.
pub fn realizes<T: Scalar>(m: &Structure<T>, tuple: &[usize], set: &TypeSet) -> Result<bool, TypesError> {
    check_length(set, tuple)?;
    Ok(first_unrealized(m, set, tuple)?.is_none())
}

/// Per-tuple outcome of an omission check.
#[derive(Clone, Debug, PartialEq)]
pub struct Omission<T> {
    pub omitted: bool,
    /// Tuples realizing the type, lexicographically.
    pub realizing: Vec<Vec<usize>>,
    /// For every other tuple, the first member below 1 and its value.
    pub witnesses: Vec<(Vec<usize>, Formula, T)>,
}

pub fn omits<T: Scalar>(m: &Structure<T>, set: &TypeSet) -> Result<Omission<T>, TypesError> {
    let ev = Evaluator::new(m);
    let tables: Vec<Vec<T>> = set
        .formulas
        .iter()
        .map(|f| ev.eval_all(f, &set.variables))
        .collect::<Result<_, _>>()?;
    let mut realizing = Vec::new();
    let mut witnesses = Vec::new();
    for (k, t) in tuples(m.size(), set.arity()).enumerate() {
        match tables.iter().position(|vals| !vals[k].is_one()) {
            None => realizing.push(t),
            Some(j) => witnesses.push((t, set.formulas[j].clone(), tables[j][k].clone())),
        }
    }
    Ok(Omission {
        omitted: realizing.is_empty(),
        realizing,
        witnesses,
    })
}

/// Whether some tuple realizes every member; stops at the first one.
fn realized_somewhere<T: Scalar>(m: &Structure<T>, set: &TypeSet) -> Result<Option<Vec<usize>>, TypesError> {
    let ev = Evaluator::new(m);
    let tables: Vec<Vec<T>> = set
        .formulas
        .iter()
        .map(|f| ev.eval_all(f, &set.variables))
        .collect::<Result<_, _>>()?;
    Ok(tuples(m.size(), set.arity())
        .enumerate()
        .find(|(k, _)| tables.iter().all(|vals| vals[*k].is_one()))
        .map(|(_, t)| t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorVerdict<T> {
    pub holds: bool,
    /// A model of `T` in the family and a tuple realizing `Φ`, if any.
    pub realization: Option<(usize, Vec<usize>)>,
    pub entailment: Entailment<T>,
}

/// `Φ` generates `Σ` over `T`, relative to `family`: `T ∪ Φ` is realized in
/// some member and every realization of `Φ` in a model of `T` realizes `Σ`.
pub fn generator_check<T: Scalar>(
    family: &[Structure<T>],
    theory: &Theory,
    phi: &TypeSet,
    sigma: &TypeSet,
) -> Result<GeneratorVerdict<T>, TypesError> {
    if phi.variables != sigma.variables {
        return Err(TypesError::VariableMismatch(phi.variables.clone(), sigma.variables.clone()));
    }
    let mut realization = None;
    for (i, m) in family.iter().enumerate() {
        if !check_theory(m, theory)?.satisfied {
            continue;
        }
        if let Some(t) = realized_somewhere(m, phi)? {
            realization = Some((i, t));
            break;
        }
    }
    let entailment = entails(family, theory, phi, sigma)?;
    Ok(GeneratorVerdict {
        holds: realization.is_some() && entailment.holds,
        realization,
        entailment,
    })
}

/// A single-formula threshold generator through terms: `φ(ȳ) ≥ r` over
/// `Σ(t₁(ȳ), ..., tₙ(ȳ))`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaCandidate {
    pub variables: Vec<String>,
    pub terms: Vec<Term>,
    pub formula: Formula,
    pub threshold: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaVerdict<T> {
    pub holds: bool,
    /// `{φ}` generates `Σ(t̄(ȳ))`.
    pub generator: GeneratorVerdict<T>,
    /// `T ∪ {φ ≥ r}` entails `Σ(t̄(ȳ))`.
    pub threshold: Entailment<T>,
}

impl OmegaCandidate {
    fn check(&self, arity: usize) -> Result<(), TypesError> {
        if self.terms.len() != arity {
            return Err(TypesError::MalformedTerms(format!(
                "{} term(s) for {} variable(s)",
                self.terms.len(),
                arity
            )));
        }
        if self.variables.is_empty() {
            return Err(TypesError::MalformedTerms("no parameter variables".into()));
        }
        for t in &self.terms {
            if let Some(v) = t.variables().into_iter().find(|v| !self.variables.contains(v)) {
                return Err(TypesError::MalformedTerms(format!("`{v}` is not a parameter variable")));
            }
        }
        if let Some(v) = self.formula.free_variables().into_iter().find(|v| !self.variables.contains(v)) {
            return Err(TypesError::MalformedTerms(format!("`{v}` is free in the formula")));
        }
        if self.threshold <= Rational::zero() || self.threshold >= Rational::one() {
            return Err(TypesError::MalformedTerms("the threshold must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// Checks both clauses of the threshold principality condition
/// independently and reports both.
pub fn omega_principal_check<T: Scalar>(
    family: &[Structure<T>],
    theory: &Theory,
    sigma: &TypeSet,
    candidate: &OmegaCandidate,
) -> Result<OmegaVerdict<T>, TypesError> {
    candidate.check(sigma.arity())?;
    let target = sigma.substitute_terms(&candidate.terms, candidate.variables.clone())?;
    let single = TypeSet::new("phi", candidate.variables.clone(), vec![candidate.formula.clone()])?;
    let generator = generator_check(family, theory, &single, &target)?;
    let guard = TypeSet::new(
        "phi>=r",
        candidate.variables.clone(),
        vec![Formula::geq(candidate.formula.clone(), candidate.threshold.clone())],
    )?;
    let threshold = entails(family, theory, &guard, &target)?;
    Ok(OmegaVerdict {
        holds: generator.holds && threshold.holds,
        generator,
        threshold,
    })
}

/// `Ψ(x̄) = {∃ȳ(⋀_k d(x_k, t_k(ȳ)) ≤ 0 ∧ ⋀Φ(ȳ))}`: a generator for `Σ(x̄)`
/// obtained from one for `Σ(t̄(ȳ))`.
pub fn pull_back_generator(
    phi: &TypeSet,
    terms: &[Term],
    variables: &[String],
) -> Result<TypeSet, TypesError> {
    if terms.len() != variables.len() {
        return Err(TypesError::MalformedTerms(format!(
            "{} term(s) for {} variable(s)",
            terms.len(),
            variables.len()
        )));
    }
    let mut avoid: HashSet<String> = variables.iter().cloned().collect();
    for f in &phi.formulas {
        avoid.extend(f.all_variables());
    }
    let fresh: Vec<String> = phi
        .variables
        .iter()
        .map(|y| {
            if variables.contains(y) {
                let z = fresh_variable(y, &avoid);
                avoid.insert(z.clone());
                z
            } else {
                y.clone()
            }
        })
        .collect();
    let rename: BTreeMap<String, Term> = phi
        .variables
        .iter()
        .cloned()
        .zip(fresh.iter().map(|v| Term::var(v)))
        .collect();
    let terms: Vec<Term> = terms.iter().map(|t| t.substitute(&rename)).collect();
    let close = Formula::and_all(
        variables
            .iter()
            .zip(&terms)
            .map(|(x, t)| Formula::leq(Formula::metric(Term::var(x), t.clone()), Rational::zero())),
    );
    let body = Formula::and(
        close,
        Formula::and_all(phi.formulas.iter().map(|f| f.substitute(&rename))),
    );
    Ok(TypeSet::new(
        &format!("{}*", phi.name),
        variables.to_vec(),
        vec![Formula::exists_many(&fresh, body)],
    )?)
}

/// How a metric-principality check tries to generate `Σ^δ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Candidate {
    /// `Φ = Σ^δ` itself.
    Thickened,
    /// An explicit generator over the type's variables.
    Generator(TypeSet),
    Omega(OmegaCandidate),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeltaDetail<T> {
    Generator(GeneratorVerdict<T>),
    Omega(OmegaVerdict<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaVerdict<T> {
    pub delta: Rational,
    pub holds: bool,
    pub detail: DeltaDetail<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricPrincipalReport<T> {
    pub holds: bool,
    pub verdicts: Vec<DeltaVerdict<T>>,
}

/// For each listed `δ`, checks the supplied candidate against `Σ^δ`.
pub fn metrically_principal_check<T: Scalar>(
    family: &[Structure<T>],
    theory: &Theory,
    sigma: &TypeSet,
    deltas: &[Rational],
    candidates: &[(Rational, Candidate)],
    options: &ThickenOptions,
) -> Result<MetricPrincipalReport<T>, TypesError> {
    let mut verdicts = Vec::new();
    for delta in deltas {
        let (_, candidate) = candidates
            .iter()
            .find(|(d, _)| d == delta)
            .ok_or_else(|| TypesError::MissingCandidate(delta.clone()))?;
        let thick = thicken(sigma, delta, options)?;
        let detail = match candidate {
            Candidate::Thickened => DeltaDetail::Generator(generator_check(family, theory, &thick, &thick)?),
            Candidate::Generator(phi) => DeltaDetail::Generator(generator_check(family, theory, phi, &thick)?),
            Candidate::Omega(c) => DeltaDetail::Omega(omega_principal_check(family, theory, &thick, c)?),
        };
        let holds = match &detail {
            DeltaDetail::Generator(g) => g.holds,
            DeltaDetail::Omega(o) => o.holds,
        };
        verdicts.push(DeltaVerdict {
            delta: delta.clone(),
            holds,
            detail,
        });
    }
    Ok(MetricPrincipalReport {
        holds: verdicts.iter().all(|v| v.holds),
        verdicts,
    })
}

/// The bounded space `search_model` walks.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    /// Vocabulary plus optional continuity moduli that candidates must meet.
    pub signature: Signature,
    /// Largest universe size `N`.
    pub max_size: usize,
    /// Predicate values range over `{0, 1/g, ..., 1}`.
    pub truth_resolution: u32,
    /// Off-diagonal distances range over `{1/m, ..., 1}`; `1` gives only
    /// the discrete metric.
    pub metric_resolution: u32,
    /// Rotates the order in which each table entry runs through its values.
    pub seed: u64,
}

impl SearchSpace {
    pub fn new(signature: Signature, max_size: usize, truth_resolution: u32) -> Self {
        SearchSpace {
            signature,
            max_size,
            truth_resolution,
            metric_resolution: 1,
            seed: 0,
        }
    }

    fn check(&self) -> Result<(), TypesError> {
        if self.max_size == 0 {
            return Err(TypesError::InvalidSpace("the maximum size must be at least 1".into()));
        }
        if self.truth_resolution == 0 || self.metric_resolution == 0 {
            return Err(TypesError::InvalidSpace("grid resolutions must be at least 1".into()));
        }
        self.signature
            .validate()
            .map_err(|e| TypesError::InvalidSpace(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found {
        structure: Structure<Rational>,
        /// Structures examined up to and including the one returned.
        examined: u64,
    },
    Exhausted {
        examined: u64,
    },
}

/// All genuine metrics on `n` points with off-diagonal values in
/// `{1/m, ..., 1}`, lexicographic in the upper triangle.
fn metrics(n: usize, m: u32) -> Vec<Vec<SmallRational>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for choice in tuples(m as usize, pairs.len()) {
        let mut d = vec![SmallRational::zero(); n * n];
        for (&(i, j), &c) in pairs.iter().zip(&choice) {
            let v = SmallRational::new(c as i64 + 1, m as i64);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
        let triangle = (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| d[a * n + c] <= d[a * n + b] + d[b * n + c]))
        });
        if triangle {
            out.push(d);
        }
    }
    out
}

/// One universe size of the search: the mixed-radix layout of candidates.
struct Layer<'a> {
    space: &'a SearchSpace,
    n: usize,
    names: Vec<String>,
    metrics: Vec<Vec<SmallRational>>,
    /// (symbol, arity, is_predicate) in digit order.
    tables: Vec<(String, usize, bool)>,
    radices: Vec<u64>,
    count: u64,
}

impl<'a> Layer<'a> {
    fn new(space: &'a SearchSpace, n: usize) -> Result<Self, TypesError> {
        let metrics = metrics(n, space.metric_resolution);
        let vocab = &space.signature.vocabulary;
        let mut tables = Vec::new();
        let mut radices = vec![metrics.len() as u64];
        for (p, &arity) in &vocab.predicates {
            tables.push((p.clone(), arity, true));
            radices.extend(std::iter::repeat_n(space.truth_resolution as u64 + 1, n.pow(arity as u32)));
        }
        for (f, &arity) in &vocab.operations {
            tables.push((f.clone(), arity, false));
            radices.extend(std::iter::repeat_n(n as u64, n.pow(arity as u32)));
        }
        let count = radices
            .iter()
            .try_fold(1u64, |acc, &r| acc.checked_mul(r))
            .ok_or_else(|| TypesError::InvalidSpace(format!("too many candidates at size {n}")))?;
        Ok(Layer {
            space,
            n,
            names: (0..n).map(|i| format!("e{i}")).collect(),
            metrics,
            tables,
            radices,
            count,
        })
    }

    fn build(&self, mut index: u64) -> Structure<SmallRational> {
        let mut digits = vec![0u64; self.radices.len()];
        for (slot, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *slot = index % r;
            index /= r;
        }
        let seed = self.space.seed;
        let rotate = |d: u64, r: u64| (d + seed % r) % r;
        let mut m = Structure::discrete(&self.names).expect("names are distinct");
        let n = self.n;
        let metric = &self.metrics[rotate(digits[0], self.radices[0]) as usize];
        for a in 0..n {
            for b in 0..n {
                m.set_distance_directed(a, b, metric[a * n + b]).expect("in range");
            }
        }
        let g = self.space.truth_resolution as i64;
        let mut pos = 1;
        for (name, arity, is_predicate) in &self.tables {
            let len = n.pow(*arity as u32);
            let chunk = &digits[pos..pos + len];
            let radix = self.radices[pos];
            pos += len;
            if *is_predicate {
                let values = chunk
                    .iter()
                    .map(|&d| SmallRational::new(rotate(d, radix) as i64, g))
                    .collect();
                m.add_predicate(name, *arity, values).expect("sizes match");
            } else {
                let values = chunk.iter().map(|&d| rotate(d, radix) as usize).collect();
                m.add_operation(name, *arity, values).expect("sizes match");
            }
        }
        m
    }
}

fn acceptable(
    m: &Structure<SmallRational>,
    space: &SearchSpace,
    theory: &Theory,
    types: &[TypeSet],
) -> bool {
    let moduli_ok = space.signature.moduli.is_empty()
        || crate::structures::validate_structure(m, &space.signature)
            .map(|r| r.passed())
            .unwrap_or(false);
    if !moduli_ok {
        return false;
    }
    let ev = Evaluator::new(m);
    if !theory
        .sentences
        .iter()
        .all(|s| ev.sentence(s).map(|v| v.is_one()).unwrap_or(false))
    {
        return false;
    }
    types
        .iter()
        .all(|t| matches!(realized_somewhere(m, t), Ok(None)))
}

/// Walks universe sizes `1..=N` and, within each, every table assignment on
/// the grids in canonical order; returns the first model of `T` omitting
/// every type. The result does not depend on `workers`.
pub fn search_model(
    space: &SearchSpace,
    theory: &Theory,
    types: &[TypeSet],
    workers: usize,
) -> Result<SearchOutcome, TypesError> {
    space.check()?;
    let vocab = &space.signature.vocabulary;
    theory.check(vocab)?;
    for t in types {
        t.check(vocab)?;
    }
    let g = BigInt::from(space.truth_resolution);
    for s in &theory.sentences {
        for c in s.constants() {
            if !(&g % c.denom()).is_zero() {
                return Err(TypesError::Resolution {
                    constant: c,
                    resolution: space.truth_resolution,
                });
            }
        }
    }
    for s in theory.sentences.iter().chain(types.iter().flat_map(|t| &t.formulas)) {
        for c in s.constants() {
            if c.numer().to_i64().is_none() || c.denom().to_i64().is_none() {
                return Err(TypesError::InvalidSpace(format!(
                    "constant {} is too large",
                    format_rational(&c)
                )));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| TypesError::InvalidSpace(e.to_string()))?;
    let mut examined = 0u64;
    for n in 1..=space.max_size {
        let layer = Layer::new(space, n)?;
        let hit = if workers <= 1 {
            (0..layer.count).find(|&i| acceptable(&layer.build(i), space, theory, types))
        } else {
            pool.install(|| {
                (0..layer.count)
                    .into_par_iter()
                    .find_first(|&i| acceptable(&layer.build(i), space, theory, types))
            })
        };
        match hit {
            Some(i) => {
                let structure = layer.build(i).convert::<Rational>()?;
                return Ok(SearchOutcome::Found {
                    structure,
                    examined: examined + i + 1,
                });
            }
            None => examined += layer.count,
        }
    }
    Ok(SearchOutcome::Exhausted { examined })
}

/// A realized complete type: a tuple in a member of the family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteTypeRecord {
    pub structure: usize,
    pub tuple: Vec<usize>,
}

/// When a tuple realizes a record.
#[derive(Clone, Debug, PartialEq)]
pub enum RecordEquivalence {
    /// The pointed structures are isomorphic. For finite structures this is
    /// exactly equality of complete types.
    Isomorphism,
    /// Agreement on every formula of the corpus, read over `x1..xn`.
    Corpus(Vec<Formula>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeDistance<T> {
    pub value: T,
    /// False when no model in the family realizes both records and the
    /// diameter bound 1 is returned by convention.
    pub realized: bool,
}

/// Whether `(M, ā)` and `(N, b̄)` are isomorphic as pointed structures.
pub fn pointed_isomorphic<T: Scalar>(m: &Structure<T>, a: &[usize], n: &Structure<T>, b: &[usize]) -> bool {
    if m.size() != n.size() || a.len() != b.len() || m.vocabulary() != n.vocabulary() {
        return false;
    }
    let size = m.size();
    let mut map = vec![usize::MAX; size];
    let mut used = vec![false; size];
    let mut seed: Vec<(usize, usize)> = a.iter().copied().zip(b.iter().copied()).collect();
    for (c, &x) in m.constants() {
        seed.push((x, n.constant(c).expect("same vocabulary")));
    }
    for (x, y) in seed {
        if map[x] == usize::MAX && !used[y] {
            map[x] = y;
            used[y] = true;
        } else if map[x] != y {
            return false;
        }
    }
    let fixed: Vec<usize> = (0..size).filter(|&x| map[x] != usize::MAX).collect();
    let free: Vec<usize> = (0..size).filter(|&x| map[x] == usize::MAX).collect();
    // Check the pre-assigned part once, then extend element by element.
    let mut assigned: Vec<usize> = Vec::new();
    for &x in &fixed {
        assigned.push(x);
        if !consistent(m, n, &map, &assigned, x) {
            return false;
        }
    }
    extend(m, n, &mut map, &mut used, &mut assigned, &free, 0)
}

/// Checks every metric and predicate entry involving `new` among assigned
/// elements, and operation entries whose arguments and value are assigned.
fn consistent<T: Scalar>(m: &Structure<T>, n: &Structure<T>, map: &[usize], assigned: &[usize], new: usize) -> bool {
    for &x in assigned {
        if m.distance(new, x) != n.distance(map[new], map[x]) || m.distance(x, new) != n.distance(map[x], map[new]) {
            return false;
        }
    }
    let k = assigned.len();
    for (p, table) in m.predicates() {
        for t in tuples(k, table.arity) {
            let args: Vec<usize> = t.iter().map(|&i| assigned[i]).collect();
            if !args.contains(&new) {
                continue;
            }
            let image: Vec<usize> = args.iter().map(|&x| map[x]).collect();
            if m.predicate_value(p, &args) != n.predicate_value(p, &image) {
                return false;
            }
        }
    }
    for (f, table) in m.operations() {
        for t in tuples(k, table.arity) {
            let args: Vec<usize> = t.iter().map(|&i| assigned[i]).collect();
            let value = m.operation_value(f, &args).expect("total");
            if !args.contains(&new) && value != new {
                continue;
            }
            if map[value] == usize::MAX {
                continue;
            }
            let image: Vec<usize> = args.iter().map(|&x| map[x]).collect();
            if n.operation_value(f, &image) != Some(map[value]) {
                return false;
            }
        }
    }
    true
}

fn extend<T: Scalar>(
    m: &Structure<T>,
    n: &Structure<T>,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    assigned: &mut Vec<usize>,
    free: &[usize],
    depth: usize,
) -> bool {
    if depth == free.len() {
        // Operation entries whose value was assigned before its arguments
        // are rechecked here in full.
        return m.operations().iter().all(|(f, table)| {
            tuples(m.size(), table.arity).all(|t| {
                let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                n.operation_value(f, &image) == Some(map[m.operation_value(f, &t).expect("total")])
            })
        });
    }
    let x = free[depth];
    for y in 0..n.size() {
        if used[y] {
            continue;
        }
        map[x] = y;
        used[y] = true;
        assigned.push(x);
        if consistent(m, n, map, assigned, x) && extend(m, n, map, used, assigned, free, depth + 1) {
            return true;
        }
        assigned.pop();
        used[y] = false;
        map[x] = usize::MAX;
    }
    false
}

fn corpus_values<T: Scalar>(m: &Structure<T>, corpus: &[Formula], tuple: &[usize]) -> Result<Vec<T>, TypesError> {
    let vars: Vec<String> = (1..=tuple.len()).map(|i| format!("x{i}")).collect();
    let ev = Evaluator::new(m);
    Ok(corpus
        .iter()
        .map(|f| ev.eval_tuple(f, &vars, tuple))
        .collect::<Result<_, _>>()?)
}

/// The least `max_k d(a_k, b_k)` over models of `T` in the family and
/// tuples realizing `p` and `q`; 1 when no model realizes both.
pub fn type_distance<T: Scalar>(
    family: &[Structure<T>],
    theory: &Theory,
    p: &CompleteTypeRecord,
    q: &CompleteTypeRecord,
    equivalence: &RecordEquivalence,
) -> Result<TypeDistance<T>, TypesError> {
    if family.is_empty() {
        return Err(TypesError::EmptyFamily);
    }
    if p.tuple.len() != q.tuple.len() {
        return Err(TypesError::LengthMismatch {
            expected: p.tuple.len(),
            found: q.tuple.len(),
        });
    }
    for r in [p, q] {
        let m = family.get(r.structure).ok_or(TypesError::UnknownStructure(r.structure))?;
        if let Some(&bad) = r.tuple.iter().find(|&&a| a >= m.size()) {
            return Err(StructureError::ElementOutOfRange(bad).into());
        }
    }
    let arity = p.tuple.len();
    let reference = |r: &CompleteTypeRecord| -> Result<Option<Vec<T>>, TypesError> {
        match equivalence {
            RecordEquivalence::Isomorphism => Ok(None),
            RecordEquivalence::Corpus(c) => Ok(Some(corpus_values(&family[r.structure], c, &r.tuple)?)),
        }
    };
    let (p_ref, q_ref) = (reference(p)?, reference(q)?);
    let matches = |m: &Structure<T>, t: &[usize], r: &CompleteTypeRecord, values: &Option<Vec<T>>| -> Result<bool, TypesError> {
        match (equivalence, values) {
            (RecordEquivalence::Corpus(c), Some(v)) => Ok(corpus_values(m, c, t)? == *v),
            _ => Ok(pointed_isomorphic(m, t, &family[r.structure], &r.tuple)),
        }
    };
    let mut best: Option<T> = None;
    for m in family {
        if !check_theory(m, theory)?.satisfied {
            continue;
        }
        let all: Vec<Vec<usize>> = tuples(m.size(), arity).collect();
        let mut ps = Vec::new();
        let mut qs = Vec::new();
        for t in &all {
            if matches(m, t, p, &p_ref)? {
                ps.push(t);
            }
            if matches(m, t, q, &q_ref)? {
                qs.push(t);
            }
        }
        for a in &ps {
            for b in &qs {
                let d = a
                    .iter()
                    .zip(b.iter())
                    .map(|(&x, &y)| m.distance(x, y).clone())
                    .fold(T::zero(), max);
                if best.as_ref().is_none_or(|cur| d < *cur) {
                    best = Some(d);
                }
            }
        }
    }
    Ok(match best {
        Some(value) => TypeDistance { value, realized: true },
        None => TypeDistance {
            value: T::one(),
            realized: false,
        },
    })
}
