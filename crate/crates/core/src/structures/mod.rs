//! Finite `[0,1]`-valued metric structures.
//!
//! Elements are opaque ids kept in declaration order; every table is stored
//! densely and indexed by element positions, so all enumeration orders are
//! derived from that declaration order.

mod construct;
mod validate;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::syntax::Vocabulary;
use crate::Rational;

pub use construct::{
    closure, combine, generated_substructure, metric_from_similarity, reduct, rename, similarity_view,
    Combined, Renaming,
};
pub use validate::{
    has_discrete_metric, lipschitz_check, validate_structure, ValidationReport, Violation, ViolationKind,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("the universe must be nonempty")]
    EmptyUniverse,
    #[error("element `{0}` declared twice")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element index {0} out of range")]
    ElementOutOfRange(usize),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` already defined")]
    DuplicateSymbol(String),
    #[error("table for `{symbol}` has {found} entries, expected {expected}")]
    TableSize {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("vocabulary mismatch: missing {missing:?}, extra {extra:?}")]
    VocabularyMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("`{0}` is not closed under `{1}`")]
    NotClosed(String, String),
    #[error("cannot generate a substructure from an empty set without constants")]
    EmptyGenerators,
    #[error("invalid renaming: {0}")]
    BadRenaming(String),
    #[error("value of `{0}` is not representable in the target scalar type")]
    Unrepresentable(String),
    #[error("{0}")]
    Invalid(String),
}

/// Values of a predicate on every tuple, row-major in element order.
#[derive(Clone, Debug, PartialEq)]
pub struct PredicateTable<T> {
    pub arity: usize,
    pub values: Vec<T>,
}

/// Values of an operation (arity ≥ 1) on every tuple, as element indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationTable {
    pub arity: usize,
    pub values: Vec<usize>,
}

/// A finite metric structure with truth values in `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Structure<T = Rational> {
    universe: Vec<String>,
    index: HashMap<String, usize>,
    metric: Vec<T>,
    predicates: BTreeMap<String, PredicateTable<T>>,
    operations: BTreeMap<String, OperationTable>,
    constants: BTreeMap<String, usize>,
}

/// Row-major position of `tuple` among the `size^arity` tuples.
pub fn tuple_index(size: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &a| acc * size + a)
}

/// All tuples of the given length over `0..size`, lexicographically.
pub fn tuples(size: usize, arity: usize) -> Tuples {
    Tuples {
        size,
        current: if size == 0 && arity > 0 {
            None
        } else {
            Some(vec![0; arity])
        },
    }
}

pub struct Tuples {
    size: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < self.size {
                self.current = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    }
}

impl<T: Scalar> Structure<T> {
    /// A structure with the discrete metric (all off-diagonal distances 1)
    /// and no symbols.
    pub fn discrete<S: AsRef<str>>(names: &[S]) -> Result<Self, StructureError> {
        if names.is_empty() {
            return Err(StructureError::EmptyUniverse);
        }
        let mut index = HashMap::new();
        let mut universe = Vec::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            let name = name.as_ref().to_owned();
            if index.insert(name.clone(), i).is_some() {
                return Err(StructureError::DuplicateElement(name));
            }
            universe.push(name);
        }
        let n = universe.len();
        let metric = (0..n * n)
            .map(|k| if k / n == k % n { T::zero() } else { T::one() })
            .collect();
        Ok(Structure {
            universe,
            index,
            metric,
            predicates: BTreeMap::new(),
            operations: BTreeMap::new(),
            constants: BTreeMap::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn element_name(&self, i: usize) -> &str {
        &self.universe[i]
    }

    pub fn element(&self, name: &str) -> Result<usize, StructureError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| StructureError::UnknownElement(name.to_owned()))
    }

    pub fn distance(&self, a: usize, b: usize) -> &T {
        &self.metric[a * self.size() + b]
    }

    /// Sets `d(a,b)` and `d(b,a)`.
    pub fn set_distance(&mut self, a: usize, b: usize, value: T) -> Result<(), StructureError> {
        self.check_element(a)?;
        self.check_element(b)?;
        let n = self.size();
        self.metric[a * n + b] = value.clone();
        self.metric[b * n + a] = value;
        Ok(())
    }

    /// Sets only `d(a,b)`; used to load possibly-invalid tables for validation.
    pub fn set_distance_directed(
        &mut self,
        a: usize,
        b: usize,
        value: T,
    ) -> Result<(), StructureError> {
        self.check_element(a)?;
        self.check_element(b)?;
        let n = self.size();
        self.metric[a * n + b] = value;
        Ok(())
    }

    pub fn metric_table(&self) -> &[T] {
        &self.metric
    }

    fn check_element(&self, a: usize) -> Result<(), StructureError> {
        if a < self.size() {
            Ok(())
        } else {
            Err(StructureError::ElementOutOfRange(a))
        }
    }

    fn check_fresh(&self, name: &str) -> Result<(), StructureError> {
        if self.predicates.contains_key(name)
            || self.operations.contains_key(name)
            || self.constants.contains_key(name)
        {
            return Err(StructureError::DuplicateSymbol(name.to_owned()));
        }
        Ok(())
    }

    /// Adds a predicate from its full row-major table.
    pub fn add_predicate(
        &mut self,
        name: &str,
        arity: usize,
        values: Vec<T>,
    ) -> Result<(), StructureError> {
        self.check_fresh(name)?;
        let expected = self.size().pow(arity as u32);
        if values.len() != expected {
            return Err(StructureError::TableSize {
                symbol: name.to_owned(),
                expected,
                found: values.len(),
            });
        }
        self.predicates
            .insert(name.to_owned(), PredicateTable { arity, values });
        Ok(())
    }

    /// Adds a predicate computed pointwise.
    pub fn add_predicate_fn(
        &mut self,
        name: &str,
        arity: usize,
        f: impl Fn(&[usize]) -> T,
    ) -> Result<(), StructureError> {
        let values = tuples(self.size(), arity).map(|t| f(&t)).collect();
        self.add_predicate(name, arity, values)
    }

    pub fn set_predicate(
        &mut self,
        name: &str,
        tuple: &[usize],
        value: T,
    ) -> Result<(), StructureError> {
        let n = self.size();
        let table = self
            .predicates
            .get_mut(name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_owned()))?;
        if tuple.len() != table.arity || tuple.iter().any(|&a| a >= n) {
            return Err(StructureError::Invalid(format!("bad tuple for `{name}`")));
        }
        table.values[tuple_index(n, tuple)] = value;
        Ok(())
    }

    /// Adds an operation of arity ≥ 1 from its row-major table.
    pub fn add_operation(
        &mut self,
        name: &str,
        arity: usize,
        values: Vec<usize>,
    ) -> Result<(), StructureError> {
        if arity == 0 {
            let &[c] = values.as_slice() else {
                return Err(StructureError::TableSize {
                    symbol: name.to_owned(),
                    expected: 1,
                    found: values.len(),
                });
            };
            return self.add_constant(name, c);
        }
        self.check_fresh(name)?;
        let expected = self.size().pow(arity as u32);
        if values.len() != expected {
            return Err(StructureError::TableSize {
                symbol: name.to_owned(),
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= self.size()) {
            return Err(StructureError::ElementOutOfRange(bad));
        }
        self.operations
            .insert(name.to_owned(), OperationTable { arity, values });
        Ok(())
    }

    pub fn add_operation_fn(
        &mut self,
        name: &str,
        arity: usize,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<(), StructureError> {
        let values = tuples(self.size(), arity).map(|t| f(&t)).collect();
        self.add_operation(name, arity, values)
    }

    pub fn add_constant(&mut self, name: &str, element: usize) -> Result<(), StructureError> {
        self.check_fresh(name)?;
        self.check_element(element)?;
        self.constants.insert(name.to_owned(), element);
        Ok(())
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateTable<T>> {
        self.predicates.get(name)
    }

    pub fn predicates(&self) -> &BTreeMap<String, PredicateTable<T>> {
        &self.predicates
    }

    pub fn predicate_value(&self, name: &str, tuple: &[usize]) -> Option<&T> {
        let table = self.predicates.get(name)?;
        Some(&table.values[tuple_index(self.size(), tuple)])
    }

    pub fn operation(&self, name: &str) -> Option<&OperationTable> {
        self.operations.get(name)
    }

    pub fn operations(&self) -> &BTreeMap<String, OperationTable> {
        &self.operations
    }

    pub fn operation_value(&self, name: &str, tuple: &[usize]) -> Option<usize> {
        if tuple.is_empty() {
            return self.constant(name);
        }
        let table = self.operations.get(name)?;
        Some(table.values[tuple_index(self.size(), tuple)])
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.constants
    }

    /// The vocabulary read off the tables present.
    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::new();
        for (name, table) in &self.predicates {
            v.predicates.insert(name.clone(), table.arity);
        }
        for (name, table) in &self.operations {
            v.operations.insert(name.clone(), table.arity);
        }
        for name in self.constants.keys() {
            v.operations.insert(name.clone(), 0);
        }
        v
    }

    /// Removes a symbol of any kind; returns whether it was present.
    pub fn remove_symbol(&mut self, name: &str) -> bool {
        self.predicates.remove(name).is_some()
            || self.operations.remove(name).is_some()
            || self.constants.remove(name).is_some()
    }

    /// Converts every value into another scalar type.
    pub fn convert<U: Scalar>(&self) -> Result<Structure<U>, StructureError> {
        let conv = |v: &T, what: &str| -> Result<U, StructureError> {
            v.to_rational()
                .and_then(|r| U::from_rational(&r))
                .ok_or_else(|| StructureError::Unrepresentable(what.to_owned()))
        };
        let metric = self
            .metric
            .iter()
            .map(|v| conv(v, "d"))
            .collect::<Result<_, _>>()?;
        let mut predicates = BTreeMap::new();
        for (name, table) in &self.predicates {
            let values = table
                .values
                .iter()
                .map(|v| conv(v, name))
                .collect::<Result<_, _>>()?;
            predicates.insert(
                name.clone(),
                PredicateTable {
                    arity: table.arity,
                    values,
                },
            );
        }
        Ok(Structure {
            universe: self.universe.clone(),
            index: self.index.clone(),
            metric,
            predicates,
            operations: self.operations.clone(),
            constants: self.constants.clone(),
        })
    }

    /// The substructure on `subset` (any order; kept in declaration order).
    /// Fails unless the subset contains every constant and is closed under
    /// every operation.
    pub fn induced(&self, subset: &[usize]) -> Result<Structure<T>, StructureError> {
        let mut keep: Vec<usize> = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(StructureError::EmptyUniverse);
        }
        if let Some(&bad) = keep.iter().find(|&&a| a >= self.size()) {
            return Err(StructureError::ElementOutOfRange(bad));
        }
        let mut position = vec![usize::MAX; self.size()];
        for (new, &old) in keep.iter().enumerate() {
            position[old] = new;
        }
        let inside = |a: usize| position[a] != usize::MAX;
        let name_of_subset = || {
            keep.iter()
                .map(|&a| self.universe[a].as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        for (c, &a) in &self.constants {
            if !inside(a) {
                return Err(StructureError::NotClosed(format!("{{{}}}", name_of_subset()), c.clone()));
            }
        }
        let names: Vec<&String> = keep.iter().map(|&a| &self.universe[a]).collect();
        let mut out = Structure::discrete(&names)?;
        let m = keep.len();
        for i in 0..m {
            for j in 0..m {
                out.metric[i * m + j] = self.distance(keep[i], keep[j]).clone();
            }
        }
        for (name, table) in &self.predicates {
            out.add_predicate_fn(name, table.arity, |t| {
                let orig: Vec<usize> = t.iter().map(|&i| keep[i]).collect();
                table.values[tuple_index(self.size(), &orig)].clone()
            })?;
        }
        for (name, table) in &self.operations {
            let mut values = Vec::with_capacity(m.pow(table.arity as u32));
            for t in tuples(m, table.arity) {
                let orig: Vec<usize> = t.iter().map(|&i| keep[i]).collect();
                let image = table.values[tuple_index(self.size(), &orig)];
                if !inside(image) {
                    return Err(StructureError::NotClosed(
                        format!("{{{}}}", name_of_subset()),
                        name.clone(),
                    ));
                }
                values.push(position[image]);
            }
            out.add_operation(name, table.arity, values)?;
        }
        for (name, &a) in &self.constants {
            out.add_constant(name, position[a])?;
        }
        Ok(out)
    }

    /// Whether every value of `name` lies in `{0, 1}`.
    pub fn is_discrete_predicate(&self, name: &str) -> Option<bool> {
        let table = self.predicates.get(name)?;
        Some(
            table
                .values
                .iter()
                .all(|v| v.is_zero() || v.is_one()),
        )
    }
}
