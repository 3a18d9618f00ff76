use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::SyntaxError;
use crate::Rational;

/// Names that can never be used as predicate or operation symbols.
pub const RESERVED: &[&str] = &["d", "E", "A"];

/// Whether `name` is a well-formed identifier.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

/// Predicate and operation symbols with their arities. The metric symbol `d`
/// is implicit; arity-0 operations are constants.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vocabulary {
    #[serde(default)]
    pub predicates: BTreeMap<String, usize>,
    #[serde(default)]
    pub operations: BTreeMap<String, usize>,
}

/// The kind of a declared symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Predicate(usize),
    Operation(usize),
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_predicate(mut self, name: &str, arity: usize) -> Result<Self, SyntaxError> {
        self.add_predicate(name, arity)?;
        Ok(self)
    }

    pub fn with_operation(mut self, name: &str, arity: usize) -> Result<Self, SyntaxError> {
        self.add_operation(name, arity)?;
        Ok(self)
    }

    pub fn with_constant(self, name: &str) -> Result<Self, SyntaxError> {
        self.with_operation(name, 0)
    }

    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<(), SyntaxError> {
        self.check_fresh(name)?;
        self.predicates.insert(name.to_owned(), arity);
        Ok(())
    }

    pub fn add_operation(&mut self, name: &str, arity: usize) -> Result<(), SyntaxError> {
        self.check_fresh(name)?;
        self.operations.insert(name.to_owned(), arity);
        Ok(())
    }

    fn check_fresh(&self, name: &str) -> Result<(), SyntaxError> {
        check_symbol_name(name)?;
        if self.kind(name).is_some() {
            return Err(SyntaxError::DuplicateSymbol(name.to_owned()));
        }
        Ok(())
    }

    /// Checks name well-formedness and disjointness of the two symbol sets.
    pub fn validate(&self) -> Result<(), SyntaxError> {
        for name in self.predicates.keys().chain(self.operations.keys()) {
            check_symbol_name(name)?;
        }
        if let Some(name) = self
            .predicates
            .keys()
            .find(|p| self.operations.contains_key(*p))
        {
            return Err(SyntaxError::DuplicateSymbol(name.clone()));
        }
        Ok(())
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        if let Some(&n) = self.predicates.get(name) {
            Some(SymbolKind::Predicate(n))
        } else {
            self.operations.get(name).map(|&n| SymbolKind::Operation(n))
        }
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        self.predicates.get(name).copied()
    }

    pub fn operation_arity(&self, name: &str) -> Option<usize> {
        self.operations.get(name).copied()
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.operations.get(name) == Some(&0)
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.operations
            .iter()
            .filter(|(_, &n)| n == 0)
            .map(|(name, _)| name.as_str())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.kind(name).is_some()
    }

    /// Every symbol of `self` occurs in `other` with the same kind and arity.
    pub fn is_subvocabulary_of(&self, other: &Vocabulary) -> bool {
        self.predicates
            .iter()
            .all(|(p, n)| other.predicates.get(p) == Some(n))
            && self
                .operations
                .iter()
                .all(|(f, n)| other.operations.get(f) == Some(n))
    }

    /// Union of two vocabularies; fails on a symbol declared differently.
    pub fn union(&self, other: &Vocabulary) -> Result<Vocabulary, SyntaxError> {
        let mut out = self.clone();
        for (name, &n) in &other.predicates {
            match out.kind(name) {
                None => {
                    out.predicates.insert(name.clone(), n);
                }
                Some(SymbolKind::Predicate(m)) if m == n => {}
                Some(_) => return Err(SyntaxError::DuplicateSymbol(name.clone())),
            }
        }
        for (name, &n) in &other.operations {
            match out.kind(name) {
                None => {
                    out.operations.insert(name.clone(), n);
                }
                Some(SymbolKind::Operation(m)) if m == n => {}
                Some(_) => return Err(SyntaxError::DuplicateSymbol(name.clone())),
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.predicates.len() + self.operations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses the line-oriented vocabulary format: `pred P 1`, `op f 2`,
    /// `const c`. Blank lines and `#` comments are ignored.
    pub fn parse_text(text: &str) -> Result<Vocabulary, SyntaxError> {
        let mut vocab = Vocabulary::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || SyntaxError::Parse {
                line: lineno + 1,
                column: 1,
                message: format!("bad vocabulary declaration `{line}`"),
            };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["pred", name, arity] => {
                    let n = arity.parse().map_err(|_| bad())?;
                    vocab.add_predicate(name, n)?;
                }
                ["op", name, arity] => {
                    let n = arity.parse().map_err(|_| bad())?;
                    vocab.add_operation(name, n)?;
                }
                ["const", name] => vocab.add_operation(name, 0)?,
                _ => return Err(bad()),
            }
        }
        Ok(vocab)
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, n) in &self.predicates {
            writeln!(f, "pred {name} {n}")?;
        }
        for (name, n) in &self.operations {
            if *n == 0 {
                writeln!(f, "const {name}")?;
            } else {
                writeln!(f, "op {name} {n}")?;
            }
        }
        Ok(())
    }
}

fn check_symbol_name(name: &str) -> Result<(), SyntaxError> {
    if !is_identifier(name) || RESERVED.contains(&name) {
        return Err(SyntaxError::ReservedName(name.to_owned()));
    }
    Ok(())
}

/// A vocabulary together with sampled uniform-continuity moduli.
///
/// Each symbol carries a finite list of `(ε, δ)` pairs, read as: arguments
/// closer than `δ` (in the max metric) move the value by at most `ε`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub vocabulary: Vocabulary,
    pub moduli: BTreeMap<String, Vec<(Rational, Rational)>>,
}

impl Signature {
    pub fn new(vocabulary: Vocabulary) -> Self {
        Self {
            vocabulary,
            moduli: BTreeMap::new(),
        }
    }

    pub fn with_modulus(mut self, symbol: &str, epsilon: Rational, delta: Rational) -> Self {
        self.moduli
            .entry(symbol.to_owned())
            .or_default()
            .push((epsilon, delta));
        self
    }

    /// The sampled moduli for `symbol`; empty when none were declared.
    pub fn moduli_of(&self, symbol: &str) -> &[(Rational, Rational)] {
        self.moduli.get(symbol).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn validate(&self) -> Result<(), SyntaxError> {
        self.vocabulary.validate()?;
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        for (symbol, pairs) in &self.moduli {
            match self.vocabulary.kind(symbol) {
                None => return Err(SyntaxError::UnknownSymbol(symbol.clone())),
                Some(SymbolKind::Operation(0)) if !pairs.is_empty() => {
                    return Err(SyntaxError::InvalidModulus {
                        symbol: symbol.clone(),
                        message: "constants carry no modulus".into(),
                    })
                }
                _ => {}
            }
            for (eps, delta) in pairs {
                let open = |v: &Rational| *v > zero && *v < one;
                if !open(eps) || !open(delta) {
                    return Err(SyntaxError::InvalidModulus {
                        symbol: symbol.clone(),
                        message: "moduli pairs must lie in (0,1)".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn reserved_and_duplicate_names_rejected() {
        assert!(Vocabulary::new().with_predicate("d", 2).is_err());
        assert!(Vocabulary::new().with_predicate("E", 1).is_err());
        assert!(Vocabulary::new().with_predicate("1/2", 1).is_err());
        let v = Vocabulary::new().with_predicate("P", 1).unwrap();
        assert!(v.clone().with_operation("P", 1).is_err());
    }

    #[test]
    fn text_format() {
        let v = Vocabulary::parse_text("pred P 1\n# comment\nop f 2\nconst c\n").unwrap();
        assert_eq!(v.predicate_arity("P"), Some(1));
        assert_eq!(v.operation_arity("f"), Some(2));
        assert!(v.is_constant("c"));
        assert_eq!(Vocabulary::parse_text(&v.to_string()).unwrap(), v);
        assert!(Vocabulary::parse_text("pred P").is_err());
    }

    #[test]
    fn moduli_validation() {
        let v = Vocabulary::new().with_predicate("P", 1).unwrap();
        let ok = Signature::new(v.clone()).with_modulus("P", ratio(1, 4), ratio(3, 4));
        assert!(ok.validate().is_ok());
        let bad = Signature::new(v).with_modulus("P", ratio(1, 1), ratio(1, 2));
        assert!(bad.validate().is_err());
    }
}
