//! The connective algebra generated by Łukasiewicz implication, rational
//! constants and projections, with constructive approximation of
//! piecewise-linear targets.
//!
//! Terms are stored as a hash-consed DAG: composing terms (for instance
//! iterating the halving term) shares subterms instead of copying them.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::{format_rational, implies, is_dyadic, max, min, ratio, Scalar};
use crate::syntax::Formula;
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectiveError {
    #[error("expected {expected} argument(s), found {found}")]
    Arity { expected: usize, found: usize },
    #[error("n must be at least 1")]
    ZeroN,
    #[error("coefficient {} is not dyadic", format_rational(.0))]
    NonDyadic(Rational),
    #[error("constant {} lies outside [0,1]", format_rational(.0))]
    OutOfRange(Rational),
    #[error("grid spacing must lie in (0,1]")]
    BadSpacing,
    #[error("{0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// Zero-based projection.
    Proj(usize),
    Const(Rational),
    Implies(usize, usize),
}

/// A connective of fixed arity, stored as nodes in topological order with
/// the root last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectiveTerm {
    arity: usize,
    nodes: Vec<Node>,
}

/// Incremental construction with structural sharing.
#[derive(Clone, Debug)]
pub struct Builder {
    arity: usize,
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
}

pub type Id = usize;

impl Builder {
    pub fn new(arity: usize) -> Self {
        Builder {
            arity,
            nodes: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn intern(&mut self, node: Node) -> Id {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        self.nodes.push(node.clone());
        self.index.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// Zero-based projection onto argument `i`.
    pub fn proj(&mut self, i: usize) -> Result<Id, ConnectiveError> {
        if i >= self.arity {
            return Err(ConnectiveError::Arity {
                expected: self.arity,
                found: i + 1,
            });
        }
        Ok(self.intern(Node::Proj(i)))
    }

    pub fn constant(&mut self, r: Rational) -> Result<Id, ConnectiveError> {
        if r.is_negative() || r > Rational::one() {
            return Err(ConnectiveError::OutOfRange(r));
        }
        Ok(self.intern(Node::Const(r)))
    }

    fn unit(&mut self, r: Rational) -> Id {
        self.intern(Node::Const(r))
    }

    pub fn implies(&mut self, a: Id, b: Id) -> Id {
        self.intern(Node::Implies(a, b))
    }

    pub fn not(&mut self, a: Id) -> Id {
        let zero = self.unit(Rational::zero());
        self.implies(a, zero)
    }

    /// `(a → b) → b`, which is `max`.
    pub fn or(&mut self, a: Id, b: Id) -> Id {
        let ab = self.implies(a, b);
        self.implies(ab, b)
    }

    /// `¬(¬a ∨ ¬b)`, which is `min`.
    pub fn and(&mut self, a: Id, b: Id) -> Id {
        let (na, nb) = (self.not(a), self.not(b));
        let d = self.or(na, nb);
        self.not(d)
    }

    /// Truncated sum `¬a → b`.
    pub fn oplus(&mut self, a: Id, b: Id) -> Id {
        let na = self.not(a);
        self.implies(na, b)
    }

    /// Truncated difference `¬(a → b) = max(a - b, 0)`.
    pub fn ominus(&mut self, a: Id, b: Id) -> Id {
        let ab = self.implies(a, b);
        self.not(ab)
    }

    /// Inlines `term` with its projections replaced by `args`.
    pub fn compose(&mut self, term: &ConnectiveTerm, args: &[Id]) -> Result<Id, ConnectiveError> {
        if args.len() != term.arity {
            return Err(ConnectiveError::Arity {
                expected: term.arity,
                found: args.len(),
            });
        }
        let mut map = Vec::with_capacity(term.nodes.len());
        for node in &term.nodes {
            let id = match node {
                Node::Proj(i) => args[*i],
                Node::Const(r) => self.unit(r.clone()),
                Node::Implies(a, b) => self.implies(map[*a], map[*b]),
            };
            map.push(id);
        }
        Ok(*map.last().expect("terms are nonempty"))
    }

    /// The term rooted at `root`, keeping only reachable nodes, numbered in
    /// left-first post-order so equal terms compare equal.
    pub fn finish(&self, root: Id) -> ConnectiveTerm {
        let mut position = vec![usize::MAX; root + 1];
        let mut nodes = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if position[id] != usize::MAX {
                continue;
            }
            match (&self.nodes[id], expanded) {
                (Node::Implies(a, b), false) => {
                    stack.push((id, true));
                    stack.push((*b, false));
                    stack.push((*a, false));
                }
                (Node::Implies(a, b), true) => {
                    position[id] = nodes.len();
                    nodes.push(Node::Implies(position[*a], position[*b]));
                }
                (other, _) => {
                    position[id] = nodes.len();
                    nodes.push(other.clone());
                }
            }
        }
        ConnectiveTerm {
            arity: self.arity,
            nodes,
        }
    }
}

impl ConnectiveTerm {
    /// `Proj(i, n)` with one-based `i`, as written in the literature.
    pub fn projection(i: usize, arity: usize) -> Result<Self, ConnectiveError> {
        if i == 0 {
            return Err(ConnectiveError::Malformed("projections are numbered from 1".into()));
        }
        let mut b = Builder::new(arity);
        let id = b.proj(i - 1)?;
        Ok(b.finish(id))
    }

    pub fn constant(r: Rational, arity: usize) -> Result<Self, ConnectiveError> {
        let mut b = Builder::new(arity);
        let id = b.constant(r)?;
        Ok(b.finish(id))
    }

    pub fn implies(a: &ConnectiveTerm, b: &ConnectiveTerm) -> Result<Self, ConnectiveError> {
        if a.arity != b.arity {
            return Err(ConnectiveError::Arity {
                expected: a.arity,
                found: b.arity,
            });
        }
        let mut builder = Builder::new(a.arity);
        let args: Vec<Id> = (0..a.arity)
            .map(|i| builder.proj(i))
            .collect::<Result<_, _>>()?;
        let x = builder.compose(a, &args)?;
        let y = builder.compose(b, &args)?;
        let root = builder.implies(x, y);
        Ok(builder.finish(root))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> Id {
        self.nodes.len() - 1
    }

    /// Number of nodes in the shared representation.
    pub fn dag_size(&self) -> usize {
        self.nodes.len()
    }

    /// Number of nodes once written out as a tree (saturating).
    pub fn tree_size(&self) -> u128 {
        let mut size: Vec<u128> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let s = match node {
                Node::Implies(a, b) => size[*a].saturating_add(size[*b]).saturating_add(1),
                _ => 1,
            };
            size.push(s);
        }
        size[self.root()]
    }

    /// Writes the term as a formula whose 0-ary predicates `x1..xn` stand
    /// for the projections.
    pub fn to_formula(&self) -> Formula {
        let args: Vec<Formula> = (1..=self.arity)
            .map(|i| Formula::pred(&format!("x{i}"), vec![]))
            .collect();
        apply_unchecked(self, &args)
    }

    /// Reads a term back from a formula built from `x1..xn`, constants and
    /// connectives.
    pub fn from_formula(f: &Formula, arity: usize) -> Result<Self, ConnectiveError> {
        fn go(f: &Formula, b: &mut Builder) -> Result<Id, ConnectiveError> {
            match f {
                Formula::Pred(name, args) if args.is_empty() => {
                    let i: usize = name
                        .strip_prefix('x')
                        .and_then(|s| s.parse().ok())
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| ConnectiveError::Malformed(format!("`{name}` is not a projection")))?;
                    b.proj(i - 1)
                }
                Formula::Const(r) => b.constant(r.clone()),
                Formula::Implies(x, y) => {
                    let x = go(x, b)?;
                    let y = go(y, b)?;
                    Ok(b.implies(x, y))
                }
                Formula::Not(_)
                | Formula::Or(..)
                | Formula::And(..)
                | Formula::Leq(..)
                | Formula::Geq(..) => go(&f.expand(), b),
                _ => Err(ConnectiveError::Malformed(
                    "connective terms have no quantifiers or atoms".into(),
                )),
            }
        }
        let mut b = Builder::new(arity);
        let root = go(f, &mut b)?;
        Ok(b.finish(root))
    }

    /// Syntactic Lipschitz bound with respect to the max norm. Each
    /// implication adds the bounds of its sides, except that a constant side
    /// contributes nothing and the `max` pattern `(u → v) → v` takes the
    /// larger of the two bounds.
    pub fn lipschitz_bound(&self) -> Rational {
        let mut bound: Vec<Rational> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let l = match node {
                Node::Proj(_) => Rational::one(),
                Node::Const(_) => Rational::zero(),
                Node::Implies(a, b) => match self.nodes[*a] {
                    Node::Implies(u, v) if v == *b => max(bound[u].clone(), bound[*b].clone()),
                    _ => bound[*a].clone() + bound[*b].clone(),
                },
            };
            bound.push(l);
        }
        bound[self.root()].clone()
    }
}

impl std::fmt::Display for ConnectiveTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", crate::syntax::render(&self.to_formula()))
    }
}

/// Exact (for exact scalars) bottom-up evaluation.
pub fn eval_term<T: Scalar>(t: &ConnectiveTerm, point: &[T]) -> Result<T, ConnectiveError> {
    if point.len() != t.arity {
        return Err(ConnectiveError::Arity {
            expected: t.arity,
            found: point.len(),
        });
    }
    let mut values: Vec<T> = Vec::with_capacity(t.nodes.len());
    for node in &t.nodes {
        let v = match node {
            Node::Proj(i) => point[*i].clone(),
            Node::Const(r) => T::from_rational(r)
                .ok_or_else(|| ConnectiveError::Malformed(format!("{} is not representable", format_rational(r))))?,
            Node::Implies(a, b) => implies(&values[*a], &values[*b]),
        };
        values.push(v);
    }
    Ok(values.pop().expect("terms are nonempty"))
}

/// `⋁_{i=1..n} (i/n ∧ ¬(x → i/n))`, whose value is
/// `max_i min{i/n, max(x - i/n, 0)}` and lies within `1/n` of `x/2`.
pub fn half_approx(n: usize) -> Result<ConnectiveTerm, ConnectiveError> {
    if n == 0 {
        return Err(ConnectiveError::ZeroN);
    }
    let mut b = Builder::new(1);
    let x = b.proj(0)?;
    let mut acc = None;
    for i in 1..=n {
        let c = b.unit(ratio(i as i64, n as i64));
        let xc = b.implies(x, c);
        let right = b.not(xc);
        let item = b.and(c, right);
        acc = Some(match acc {
            None => item,
            Some(prev) => b.or(prev, item),
        });
    }
    Ok(b.finish(acc.expect("n >= 1")))
}

/// A term together with a sound sup-norm error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    pub term: ConnectiveTerm,
    pub bound: Rational,
}

/// Something a connective term can be measured against.
pub trait Target: Sync {
    fn arity(&self) -> usize;
    fn value(&self, point: &[Rational]) -> Rational;
}

/// A target given by a closure.
pub struct FnTarget<F> {
    pub arity: usize,
    pub f: F,
}

impl<F: Fn(&[Rational]) -> Rational + Sync> Target for FnTarget<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn value(&self, point: &[Rational]) -> Rational {
        (self.f)(point)
    }
}

/// `clamp(r·x)` for a non-negative rational `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaling(pub Rational);

impl Target for Scaling {
    fn arity(&self) -> usize {
        1
    }

    fn value(&self, point: &[Rational]) -> Rational {
        min(self.0.clone() * point[0].clone(), Rational::one())
    }
}

/// The grid `{0, h, 2h, ...} ∪ {1}`.
pub fn grid(h: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut x = Rational::zero();
    while x < Rational::one() {
        out.push(x.clone());
        x += h;
    }
    out.push(Rational::one());
    out
}

/// Grid maximum of `|t - target|` at spacing `h`, plus `(L + L_t)·h/2`
/// where `L_t` is the syntactic bound of `t`. Sound for the whole cube.
pub fn certify(
    t: &ConnectiveTerm,
    target: &dyn Target,
    h: &Rational,
    lipschitz: &Rational,
) -> Result<Rational, ConnectiveError> {
    let (grid_max, _) = grid_error(t, target, h)?;
    Ok(grid_max + (lipschitz.clone() + t.lipschitz_bound()) * h.clone() / Rational::from_integer(2.into()))
}

/// Maximum of `|t - target|` over the grid of spacing `h`, with a point
/// attaining it.
pub fn grid_error(
    t: &ConnectiveTerm,
    target: &dyn Target,
    h: &Rational,
) -> Result<(Rational, Vec<Rational>), ConnectiveError> {
    if !h.is_positive() || *h > Rational::one() {
        return Err(ConnectiveError::BadSpacing);
    }
    if target.arity() != t.arity {
        return Err(ConnectiveError::Arity {
            expected: t.arity,
            found: target.arity(),
        });
    }
    let axis = grid(h);
    let count = axis
        .len()
        .checked_pow(t.arity as u32)
        .ok_or_else(|| ConnectiveError::Malformed("grid too large".into()))?;
    let point = |mut k: usize| -> Vec<Rational> {
        let mut p = vec![Rational::zero(); t.arity];
        for slot in p.iter_mut().rev() {
            *slot = axis[k % axis.len()].clone();
            k /= axis.len();
        }
        p
    };
    let scale = common_scale(t, h);
    let best = (0..count)
        .into_par_iter()
        .map(|k| {
            let p = point(k);
            let v = match scale {
                Some(d) => eval_scaled(t, &p, d),
                None => eval_term(t, &p)?,
            };
            let e = (v - target.value(&p)).abs();
            Ok((e, k))
        })
        .try_reduce(
            || (Rational::zero(), usize::MAX),
            |a, b| {
                // Ties go to the lowest index so the witness is deterministic.
                Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
            },
        )?;
    let witness = if best.1 == usize::MAX { point(0) } else { point(best.1) };
    Ok((best.0, witness))
}

/// A common denominator `D` for every constant of `t` and every grid
/// coordinate, when it is small enough for `i128` arithmetic.
fn common_scale(t: &ConnectiveTerm, h: &Rational) -> Option<i128> {
    let mut d = h.denom().clone();
    for node in &t.nodes {
        if let Node::Const(r) = node {
            d = d.lcm(r.denom());
        }
    }
    d.to_i128().filter(|&d| d < 1 << 100)
}

/// Evaluation on numerators over `d`: all node values are multiples of
/// `1/d`, and `x → y` is `min(d - x + y, d)`.
fn eval_scaled(t: &ConnectiveTerm, point: &[Rational], d: i128) -> Rational {
    let big = BigInt::from(d);
    let scaled = |r: &Rational| -> i128 {
        (r.numer() * (&big / r.denom())).to_i128().expect("bounded by the scale")
    };
    let coords: Vec<i128> = point.iter().map(scaled).collect();
    let mut values: Vec<i128> = Vec::with_capacity(t.nodes.len());
    for node in &t.nodes {
        let v = match node {
            Node::Proj(i) => coords[*i],
            Node::Const(r) => scaled(r),
            Node::Implies(a, b) => (d - values[*a] + values[*b]).min(d),
        };
        values.push(v);
    }
    Rational::new(values.pop().expect("terms are nonempty").into(), big)
}

fn dyadic_parts(r: &Rational) -> Result<(BigInt, u32), ConnectiveError> {
    if !is_dyadic(r) {
        return Err(ConnectiveError::NonDyadic(r.clone()));
    }
    let k = r.denom().trailing_zeros().unwrap_or(0) as u32;
    Ok((r.numer().clone(), k))
}

/// Builds an approximation of `clamp(p/2^k · u)` on top of node `u`.
/// Returns the node and whether it is exact.
fn scale_node(b: &mut Builder, u: Id, p: &BigInt, k: u32, half: &ConnectiveTerm) -> Result<(Id, bool), ConnectiveError> {
    if p.is_zero() {
        return Ok((b.unit(Rational::zero()), true));
    }
    // Bits at positions >= k double u; the others are iterated halvings.
    let mut doubled = u;
    let mut halves = vec![u];
    let mut acc: Option<Id> = None;
    let mut exact = true;
    let bits = p.bits();
    for j in 0..bits.max(k as u64) {
        if (j as u32) < k {
            continue;
        }
        if p.bit(j) {
            acc = Some(match acc {
                None => doubled,
                Some(a) => b.oplus(a, doubled),
            });
        }
        doubled = b.oplus(doubled, doubled);
    }
    for j in (0..k.min(bits as u32)).rev() {
        if !p.bit(j as u64) {
            continue;
        }
        let depth = (k - j) as usize;
        while halves.len() <= depth {
            let last = *halves.last().expect("nonempty");
            halves.push(b.compose(half, &[last])?);
        }
        exact = false;
        acc = Some(match acc {
            None => halves[depth],
            Some(a) => b.oplus(a, halves[depth]),
        });
    }
    Ok((acc.expect("p > 0 has a set bit"), exact))
}

/// An approximation of `clamp(p/2^k · x)` from truncated sums and iterated
/// `half_approx(n)`, certified on the grid of spacing `1/(8n)`.
pub fn scale_dyadic(p: u64, k: u32, n: usize) -> Result<Approximation, ConnectiveError> {
    if n == 0 {
        return Err(ConnectiveError::ZeroN);
    }
    let r = Rational::new(BigInt::from(p), BigInt::one() << k);
    let (p, k) = if r.is_zero() {
        (BigInt::zero(), 0)
    } else {
        dyadic_parts(&r)?
    };
    let half = half_approx(n)?;
    let mut b = Builder::new(1);
    let x = b.proj(0)?;
    let (root, exact) = scale_node(&mut b, x, &p, k, &half)?;
    let term = b.finish(root);
    let bound = if exact {
        Rational::zero()
    } else {
        certify(&term, &Scaling(r.clone()), &ratio(1, 8 * n as i64), &r)?
    };
    Ok(Approximation { term, bound })
}

/// `clamp(Σ cᵢxᵢ + b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub coefficients: Vec<Rational>,
    pub intercept: Rational,
}

impl AffinePiece {
    pub fn new(coefficients: Vec<Rational>, intercept: Rational) -> Self {
        AffinePiece {
            coefficients,
            intercept,
        }
    }

    pub fn value(&self, point: &[Rational]) -> Rational {
        let s = self
            .coefficients
            .iter()
            .zip(point)
            .fold(self.intercept.clone(), |acc, (c, x)| acc + c * x);
        crate::scalar::clamp_unit(s)
    }
}

/// A max over groups of a min over truncated affine pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLSpec {
    pub arity: usize,
    pub groups: Vec<Vec<AffinePiece>>,
}

impl PLSpec {
    pub fn new(arity: usize, groups: Vec<Vec<AffinePiece>>) -> Result<Self, ConnectiveError> {
        if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
            return Err(ConnectiveError::Malformed("every group needs at least one piece".into()));
        }
        for piece in groups.iter().flatten() {
            if piece.coefficients.len() != arity {
                return Err(ConnectiveError::Arity {
                    expected: arity,
                    found: piece.coefficients.len(),
                });
            }
        }
        Ok(PLSpec { arity, groups })
    }

    /// Max-norm Lipschitz bound: the largest coefficient mass of a piece.
    pub fn lipschitz_bound(&self) -> Rational {
        self.groups
            .iter()
            .flatten()
            .map(|p| p.coefficients.iter().fold(Rational::zero(), |a, c| a + c.abs()))
            .fold(Rational::zero(), max)
    }
}

impl Target for PLSpec {
    fn arity(&self) -> usize {
        self.arity
    }

    fn value(&self, point: &[Rational]) -> Rational {
        self.groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|p| p.value(point))
                    .reduce(min)
                    .expect("groups are nonempty")
            })
            .reduce(max)
            .expect("specs are nonempty")
    }
}

/// Builds `clamp(Σ_{m≥i} u_m + c)` for terms `u_m` with values in `[0,1]`
/// via `clamp(a + y) = (a ⊕ clamp(y)) ⊖ clamp(-y)`. The negative side is
/// `clamp(Σ ¬u_m - c - r)` with `r` the number of remaining terms.
struct PieceBuilder<'a> {
    b: &'a mut Builder,
    units: Vec<Id>,
    negated: Vec<Id>,
    memo: HashMap<(usize, Rational, bool), Id>,
}

impl PieceBuilder<'_> {
    fn clamp_sum(&mut self, i: usize, c: Rational, flipped: bool) -> Id {
        let remaining = self.units.len() - i;
        if c >= Rational::one() {
            return self.b.unit(Rational::one());
        }
        if c <= -Rational::from_integer(BigInt::from(remaining)) {
            return self.b.unit(Rational::zero());
        }
        let key = (i, c.clone(), flipped);
        if let Some(&id) = self.memo.get(&key) {
            return id;
        }
        let terms = if flipped { &self.negated } else { &self.units };
        let id = if !c.is_negative() {
            let tail = terms[i..].to_vec();
            let mut acc = if c.is_zero() {
                None
            } else {
                Some(self.b.unit(c.clone()))
            };
            for &u in tail.iter().rev() {
                acc = Some(match acc {
                    None => u,
                    Some(a) => self.b.oplus(u, a),
                });
            }
            acc.unwrap_or_else(|| self.b.unit(Rational::zero()))
        } else {
            let a = terms[i];
            let pos = self.clamp_sum(i + 1, c.clone(), flipped);
            let rest = Rational::from_integer(BigInt::from(remaining - 1));
            let neg = self.clamp_sum(i + 1, -c - rest, !flipped);
            let sum = self.b.oplus(a, pos);
            self.b.ominus(sum, neg)
        };
        self.memo.insert(key, id);
        id
    }
}

/// Realizes a truncated affine piece. Returns the node and its error bound.
fn build_piece(
    b: &mut Builder,
    piece: &AffinePiece,
    n: usize,
    half: &ConnectiveTerm,
    scale_bounds: &mut HashMap<(BigInt, u32), Rational>,
) -> Result<(Id, Rational), ConnectiveError> {
    let mut units = Vec::new();
    let mut intercept = piece.intercept.clone();
    let mut error = Rational::zero();
    for (i, c) in piece.coefficients.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        dyadic_parts(c)?;
        let x = b.proj(i)?;
        let (base, magnitude) = if c.is_negative() {
            intercept += c;
            (b.not(x), -c)
        } else {
            (x, c.clone())
        };
        let whole = magnitude.floor();
        for _ in 0..whole.to_integer().to_usize().unwrap_or(0) {
            units.push(base);
        }
        let frac = magnitude - whole;
        if !frac.is_zero() {
            let (p, k) = dyadic_parts(&frac)?;
            let (node, _) = scale_node(b, base, &p, k, half)?;
            units.push(node);
            let bound = match scale_bounds.get(&(p.clone(), k)) {
                Some(e) => e.clone(),
                None => {
                    let e = scale_dyadic(p.to_u64().unwrap_or(u64::MAX), k, n)?.bound;
                    scale_bounds.insert((p, k), e.clone());
                    e
                }
            };
            error += bound;
        }
    }
    let negated: Vec<Id> = units.iter().map(|&u| b.not(u)).collect();
    let mut pb = PieceBuilder {
        b,
        units,
        negated,
        memo: HashMap::new(),
    };
    let id = pb.clamp_sum(0, intercept, false);
    Ok((id, error))
}

/// Approximates a lattice of truncated dyadic-affine pieces. Integer
/// coefficients give an exact term (bound 0). Fractional coefficients go
/// through [`scale_dyadic`]; since truncated sums and lattice operations
/// are 1-Lipschitz, the bound is the largest sum over a piece of the
/// certified scaling errors.
pub fn approx_lattice(spec: &PLSpec, n: usize) -> Result<Approximation, ConnectiveError> {
    if n == 0 {
        return Err(ConnectiveError::ZeroN);
    }
    let half = half_approx(n)?;
    let mut b = Builder::new(spec.arity);
    let mut scale_bounds = HashMap::new();
    let mut bound = Rational::zero();
    let mut outer = None;
    for group in &spec.groups {
        let mut inner = None;
        for piece in group {
            let (id, e) = build_piece(&mut b, piece, n, &half, &mut scale_bounds)?;
            bound = max(bound, e);
            inner = Some(match inner {
                None => id,
                Some(a) => b.and(a, id),
            });
        }
        let g = inner.expect("groups are nonempty");
        outer = Some(match outer {
            None => g,
            Some(a) => b.or(a, g),
        });
    }
    Ok(Approximation {
        term: b.finish(outer.expect("specs are nonempty")),
        bound,
    })
}

fn apply_unchecked(t: &ConnectiveTerm, args: &[Formula]) -> Formula {
    let mut built: Vec<Formula> = Vec::with_capacity(t.nodes.len());
    for node in &t.nodes {
        let f = match node {
            Node::Proj(i) => args[*i].clone(),
            Node::Const(r) => Formula::Const(r.clone()),
            Node::Implies(a, b) => Formula::implies(built[*a].clone(), built[*b].clone()),
        };
        built.push(f);
    }
    built.pop().expect("terms are nonempty")
}

/// Substitutes `φᵢ` for the `i`-th projection throughout `t`.
pub fn apply_connective(t: &ConnectiveTerm, formulas: &[Formula]) -> Result<Formula, ConnectiveError> {
    if formulas.len() != t.arity {
        return Err(ConnectiveError::Arity {
            expected: t.arity,
            found: formulas.len(),
        });
    }
    Ok(apply_unchecked(t, formulas))
}

/// The target `x/2`.
pub fn half_target() -> Scaling {
    Scaling(ratio(1, 2))
}
