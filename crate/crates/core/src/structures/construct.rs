use std::collections::{BTreeMap, BTreeSet};

use super::{tuple_index, tuples, Structure, StructureError};
use crate::scalar::Scalar;
use crate::syntax::{fresh_variable, Formula, Signature, Vocabulary};

/// A symbol renaming. Symbols not listed are mapped to themselves; the
/// extended map must be injective on the vocabulary it is applied to.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Renaming {
    pub map: BTreeMap<String, String>,
}

impl Renaming {
    pub fn new(map: BTreeMap<String, String>) -> Self {
        Renaming { map }
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Self {
        Renaming {
            map: pairs
                .iter()
                .map(|(a, b)| (a.as_ref().to_owned(), b.as_ref().to_owned()))
                .collect(),
        }
    }

    pub fn apply(&self, symbol: &str) -> String {
        self.map
            .get(symbol)
            .cloned()
            .unwrap_or_else(|| symbol.to_owned())
    }

    /// Checks the renaming against `vocab`: every listed source exists, no
    /// target is reserved, and the total map is injective.
    pub fn check(&self, vocab: &Vocabulary) -> Result<(), StructureError> {
        for (from, to) in &self.map {
            if !vocab.contains(from) {
                return Err(StructureError::BadRenaming(format!("`{from}` is not in the vocabulary")));
            }
            if !crate::syntax::is_identifier(to) || crate::syntax::RESERVED.contains(&to.as_str()) {
                return Err(StructureError::BadRenaming(format!("`{to}` is not a valid symbol")));
            }
        }
        let mut seen = BTreeSet::new();
        for s in vocab.predicates.keys().chain(vocab.operations.keys()) {
            if !seen.insert(self.apply(s)) {
                return Err(StructureError::BadRenaming(format!(
                    "two symbols are sent to `{}`",
                    self.apply(s)
                )));
            }
        }
        Ok(())
    }

    pub fn apply_vocabulary(&self, vocab: &Vocabulary) -> Vocabulary {
        Vocabulary {
            predicates: vocab
                .predicates
                .iter()
                .map(|(k, &n)| (self.apply(k), n))
                .collect(),
            operations: vocab
                .operations
                .iter()
                .map(|(k, &n)| (self.apply(k), n))
                .collect(),
        }
    }

    /// `φ^ρ`.
    pub fn apply_formula(&self, formula: &Formula) -> Formula {
        formula.rename_symbols(&self.map)
    }

    pub fn apply_signature(&self, signature: &Signature) -> Signature {
        Signature {
            vocabulary: self.apply_vocabulary(&signature.vocabulary),
            moduli: signature
                .moduli
                .iter()
                .map(|(k, v)| (self.apply(k), v.clone()))
                .collect(),
        }
    }
}

/// Restricts `m` to the symbols of `sub`; universe and metric unchanged.
pub fn reduct<T: Scalar>(m: &Structure<T>, sub: &Vocabulary) -> Result<Structure<T>, StructureError> {
    let full = m.vocabulary();
    if !sub.is_subvocabulary_of(&full) {
        let missing = sub
            .predicates
            .iter()
            .filter(|(p, n)| full.predicates.get(*p) != Some(n))
            .chain(
                sub.operations
                    .iter()
                    .filter(|(f, n)| full.operations.get(*f) != Some(n)),
            )
            .map(|(s, _)| s.clone())
            .collect();
        return Err(StructureError::VocabularyMismatch {
            missing,
            extra: vec![],
        });
    }
    let mut out = m.clone();
    for symbol in full.predicates.keys().chain(full.operations.keys()) {
        if !sub.contains(symbol) {
            out.remove_symbol(symbol);
        }
    }
    Ok(out)
}

/// `M^ρ`: the same tables under new names.
pub fn rename<T: Scalar>(m: &Structure<T>, rho: &Renaming) -> Result<Structure<T>, StructureError> {
    rho.check(&m.vocabulary())?;
    let mut out = Structure::discrete(m.universe())?;
    out.metric = m.metric.clone();
    for (name, table) in m.predicates() {
        out.add_predicate(&rho.apply(name), table.arity, table.values.clone())?;
    }
    for (name, table) in m.operations() {
        out.add_operation(&rho.apply(name), table.arity, table.values.clone())?;
    }
    for (name, &a) in m.constants() {
        out.add_constant(&rho.apply(name), a)?;
    }
    Ok(out)
}

/// Closure of `generators` (plus all constants) under the operations.
pub fn closure<T: Scalar>(m: &Structure<T>, generators: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; m.size()];
    for &a in generators.iter().chain(m.constants().values()) {
        if a < m.size() {
            inside[a] = true;
        }
    }
    let n = m.size();
    loop {
        let mut grew = false;
        for table in m.operations().values() {
            for t in tuples(n, table.arity) {
                if t.iter().all(|&a| inside[a]) {
                    let image = table.values[tuple_index(n, &t)];
                    if !inside[image] {
                        inside[image] = true;
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    (0..n).filter(|&a| inside[a]).collect()
}

/// `M ↾ ⟨A⟩`: the substructure generated by `generators`.
pub fn generated_substructure<T: Scalar>(
    m: &Structure<T>,
    generators: &[usize],
) -> Result<Structure<T>, StructureError> {
    if let Some(&bad) = generators.iter().find(|&&a| a >= m.size()) {
        return Err(StructureError::ElementOutOfRange(bad));
    }
    if generators.is_empty() && m.constants().is_empty() {
        return Err(StructureError::EmptyGenerators);
    }
    m.induced(&closure(m, generators))
}

/// The combined structure `[M0, M1]` together with the names it uses.
#[derive(Clone, Debug)]
pub struct Combined<T> {
    pub structure: Structure<T>,
    /// The monadic predicates marking each part.
    pub parts: [String; 2],
    /// `R ↦ R^k` for each part.
    pub renamings: [Renaming; 2],
}

impl<T: Scalar> Combined<T> {
    /// The vocabulary `S^k` (copies of the base symbols plus `P_k`).
    pub fn part_vocabulary(&self, k: usize) -> Vocabulary {
        let full = self.structure.vocabulary();
        let mut v = Vocabulary::new();
        for target in self.renamings[k].map.values() {
            match full.kind(target) {
                Some(crate::syntax::SymbolKind::Predicate(n)) => {
                    v.predicates.insert(target.clone(), n);
                }
                Some(crate::syntax::SymbolKind::Operation(n)) => {
                    v.operations.insert(target.clone(), n);
                }
                None => {}
            }
        }
        v.predicates.insert(self.parts[k].clone(), 1);
        v
    }
}

/// Builds `[M0, M1]`: the disjoint union at mutual distance 1, with each
/// symbol `R` copied to `R_0`, `R_1` (zero on mixed tuples; operations send
/// mixed tuples to the first element of `M0`) and part predicates marking
/// the two halves. Elements are named `0:a` and `1:b`.
pub fn combine<T: Scalar>(
    m0: &Structure<T>,
    m1: &Structure<T>,
) -> Result<Combined<T>, StructureError> {
    let vocab = m0.vocabulary();
    if vocab != m1.vocabulary() {
        return Err(StructureError::VocabularyMismatch {
            missing: vec![],
            extra: vec![],
        });
    }
    let symbols: Vec<String> = vocab
        .predicates
        .keys()
        .chain(vocab.operations.keys())
        .cloned()
        .collect();
    let mut taken: std::collections::HashSet<String> = symbols.iter().cloned().collect();
    let mut renamings = [Renaming::default(), Renaming::default()];
    for (k, renaming) in renamings.iter_mut().enumerate() {
        for s in &symbols {
            let target = fresh_variable(&format!("{s}_{k}"), &taken);
            taken.insert(target.clone());
            renaming.map.insert(s.clone(), target);
        }
    }
    let parts = [0, 1].map(|k| {
        let name = fresh_variable(&format!("Part_{k}"), &taken);
        taken.insert(name.clone());
        name
    });

    let (n0, n1) = (m0.size(), m1.size());
    let names: Vec<String> = m0
        .universe()
        .iter()
        .map(|a| format!("0:{a}"))
        .chain(m1.universe().iter().map(|b| format!("1:{b}")))
        .collect();
    let mut out = Structure::discrete(&names)?;
    for a in 0..n0 {
        for b in 0..n0 {
            out.set_distance_directed(a, b, m0.distance(a, b).clone())?;
        }
    }
    for a in 0..n1 {
        for b in 0..n1 {
            out.set_distance_directed(n0 + a, n0 + b, m1.distance(a, b).clone())?;
        }
    }
    let part_of = |x: usize| if x < n0 { 0 } else { 1 };
    let local = |x: usize| if x < n0 { x } else { x - n0 };
    let offset = [0, n0];
    let sources = [m0, m1];
    for k in 0..2 {
        out.add_predicate_fn(&parts[k], 1, |t| {
            if part_of(t[0]) == k {
                T::one()
            } else {
                T::zero()
            }
        })?;
        let src = sources[k];
        for (name, table) in src.predicates() {
            out.add_predicate_fn(&renamings[k].apply(name), table.arity, |t| {
                if t.iter().all(|&x| part_of(x) == k) {
                    let inner: Vec<usize> = t.iter().map(|&x| local(x)).collect();
                    table.values[tuple_index(src.size(), &inner)].clone()
                } else {
                    T::zero()
                }
            })?;
        }
        for (name, table) in src.operations() {
            out.add_operation_fn(&renamings[k].apply(name), table.arity, |t| {
                if t.iter().all(|&x| part_of(x) == k) {
                    let inner: Vec<usize> = t.iter().map(|&x| local(x)).collect();
                    offset[k] + table.values[tuple_index(src.size(), &inner)]
                } else {
                    0
                }
            })?;
        }
        for (name, &a) in src.constants() {
            out.add_constant(&renamings[k].apply(name), offset[k] + a)?;
        }
    }
    Ok(Combined {
        structure: out,
        parts,
        renamings,
    })
}

/// The similarity table `a ≈ b = 1 - d(a,b)`, row-major.
pub fn similarity_view<T: Scalar>(m: &Structure<T>) -> Vec<T> {
    m.metric_table()
        .iter()
        .map(|d| T::one() - d.clone())
        .collect()
}

/// Inverse of [`similarity_view`].
pub fn metric_from_similarity<T: Scalar>(similarity: &[T]) -> Vec<T> {
    similarity.iter().map(|s| T::one() - s.clone()).collect()
}
