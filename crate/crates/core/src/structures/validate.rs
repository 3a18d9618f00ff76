use super::{tuple_index, tuples, Structure, StructureError};
use crate::scalar::{abs_diff, in_unit, Scalar};
use crate::syntax::Signature;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `d(a,a) != 0`.
    MetricDiagonal,
    MetricSymmetry,
    MetricTriangle,
    /// `d(a,b) = 0` for distinct `a, b`.
    MetricNotGenuine,
    /// A metric or predicate value outside `[0,1]`.
    Range { symbol: String },
    /// A sampled `(ε, δ)` modulus fails.
    Modulus {
        symbol: String,
        epsilon: crate::Rational,
        delta: crate::Rational,
    },
    /// A symbol moves more than the max distance of its arguments.
    Lipschitz { symbol: String },
}

/// One failed check, with the element tuples and values that witness it.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation<T> {
    pub kind: ViolationKind,
    pub witness: Vec<Vec<String>>,
    pub values: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn names<T: Scalar>(m: &Structure<T>, tuple: &[usize]) -> Vec<String> {
    tuple.iter().map(|&a| m.element_name(a).to_owned()).collect()
}

fn max_distance<T: Scalar>(m: &Structure<T>, a: &[usize], b: &[usize]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| m.distance(x, y).clone())
        .fold(T::zero(), crate::scalar::max)
}

fn metric_violations<T: Scalar>(m: &Structure<T>, out: &mut Vec<Violation<T>>) {
    let n = m.size();
    for a in 0..n {
        for b in 0..n {
            let d = m.distance(a, b);
            if !in_unit(d) {
                out.push(Violation {
                    kind: ViolationKind::Range { symbol: "d".into() },
                    witness: vec![names(m, &[a, b])],
                    values: vec![d.clone()],
                });
            }
        }
    }
    for a in 0..n {
        if !m.distance(a, a).is_zero() {
            out.push(Violation {
                kind: ViolationKind::MetricDiagonal,
                witness: vec![names(m, &[a])],
                values: vec![m.distance(a, a).clone()],
            });
        }
        for b in a + 1..n {
            let (ab, ba) = (m.distance(a, b), m.distance(b, a));
            if ab != ba {
                out.push(Violation {
                    kind: ViolationKind::MetricSymmetry,
                    witness: vec![names(m, &[a, b])],
                    values: vec![ab.clone(), ba.clone()],
                });
            }
            if ab.is_zero() || ba.is_zero() {
                out.push(Violation {
                    kind: ViolationKind::MetricNotGenuine,
                    witness: vec![names(m, &[a, b])],
                    values: vec![ab.clone()],
                });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let direct = m.distance(a, c);
                let via = m.distance(a, b).clone() + m.distance(b, c).clone();
                if *direct > via {
                    out.push(Violation {
                        kind: ViolationKind::MetricTriangle,
                        witness: vec![names(m, &[a, b, c])],
                        values: vec![direct.clone(), via],
                    });
                }
            }
        }
    }
}

fn range_violations<T: Scalar>(m: &Structure<T>, out: &mut Vec<Violation<T>>) {
    for (name, table) in m.predicates() {
        for t in tuples(m.size(), table.arity) {
            let v = &table.values[tuple_index(m.size(), &t)];
            if !in_unit(v) {
                out.push(Violation {
                    kind: ViolationKind::Range {
                        symbol: name.clone(),
                    },
                    witness: vec![names(m, &t)],
                    values: vec![v.clone()],
                });
            }
        }
    }
}

/// Calls `check(symbol, ā, b̄, spread)` for every unordered pair of distinct
/// argument tuples of every non-constant symbol, where `spread` is the max
/// coordinate distance and the check returns the value change (if it is to
/// be tested) and the two values.
fn for_each_symbol_pair<T: Scalar>(
    m: &Structure<T>,
    mut check: impl FnMut(&str, &[usize], &[usize], &T, T, Vec<T>),
) {
    let n = m.size();
    for (name, table) in m.predicates() {
        let all: Vec<Vec<usize>> = tuples(n, table.arity).collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                let spread = max_distance(m, a, b);
                let va = &table.values[tuple_index(n, a)];
                let vb = &table.values[tuple_index(n, b)];
                check(name, a, b, &spread, abs_diff(va, vb), vec![va.clone(), vb.clone()]);
            }
        }
    }
    for (name, table) in m.operations() {
        let all: Vec<Vec<usize>> = tuples(n, table.arity).collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                let spread = max_distance(m, a, b);
                let fa = table.values[tuple_index(n, a)];
                let fb = table.values[tuple_index(n, b)];
                let moved = m.distance(fa, fb).clone();
                check(name, a, b, &spread, moved.clone(), vec![moved]);
            }
        }
    }
}

/// Checks the metric axioms, value ranges, and every sampled modulus of the
/// signature.
pub fn validate_structure<T: Scalar>(
    m: &Structure<T>,
    signature: &Signature,
) -> Result<ValidationReport<T>, StructureError> {
    let have = m.vocabulary();
    let want = &signature.vocabulary;
    if have != *want {
        let missing = want
            .predicates
            .keys()
            .chain(want.operations.keys())
            .filter(|s| !have.contains(s))
            .cloned()
            .collect();
        let extra = have
            .predicates
            .keys()
            .chain(have.operations.keys())
            .filter(|s| !want.contains(s))
            .cloned()
            .collect();
        return Err(StructureError::VocabularyMismatch { missing, extra });
    }
    let mut violations = Vec::new();
    metric_violations(m, &mut violations);
    range_violations(m, &mut violations);
    let moduli: Vec<(String, T, T, crate::Rational, crate::Rational)> = signature
        .moduli
        .iter()
        .flat_map(|(s, pairs)| {
            pairs.iter().map(move |(e, d)| (s.clone(), e.clone(), d.clone()))
        })
        .map(|(s, e, d)| {
            let et = T::from_rational(&e).ok_or_else(|| StructureError::Unrepresentable(s.clone()))?;
            let dt = T::from_rational(&d).ok_or_else(|| StructureError::Unrepresentable(s.clone()))?;
            Ok((s, et, dt, e, d))
        })
        .collect::<Result<_, StructureError>>()?;
    for_each_symbol_pair(m, |symbol, a, b, spread, moved, values| {
        for (s, eps, delta, e, d) in &moduli {
            if s == symbol && *spread < *delta && moved > *eps {
                violations.push(Violation {
                    kind: ViolationKind::Modulus {
                        symbol: symbol.to_owned(),
                        epsilon: e.clone(),
                        delta: d.clone(),
                    },
                    witness: vec![names(m, a), names(m, b)],
                    values: values.clone(),
                });
            }
        }
    });
    Ok(ValidationReport { violations })
}

/// Checks that every predicate and operation is 1-Lipschitz with respect to
/// the max metric on argument tuples.
pub fn lipschitz_check<T: Scalar>(m: &Structure<T>) -> ValidationReport<T> {
    let mut violations = Vec::new();
    for_each_symbol_pair(m, |symbol, a, b, spread, moved, values| {
        if moved > *spread {
            violations.push(Violation {
                kind: ViolationKind::Lipschitz {
                    symbol: symbol.to_owned(),
                },
                witness: vec![names(m, a), names(m, b)],
                values,
            });
        }
    });
    ValidationReport { violations }
}

/// True when all off-diagonal distances equal 1.
pub fn has_discrete_metric<T: Scalar>(m: &Structure<T>) -> bool {
    (0..m.size()).all(|a| (0..m.size()).all(|b| a == b || m.distance(a, b).is_one()))
}
