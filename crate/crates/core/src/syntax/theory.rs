use std::collections::BTreeMap;

use super::{render, Formula, SyntaxError, Term, Vocabulary};

/// A named, ordered list of sentences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    pub name: String,
    pub sentences: Vec<Formula>,
}

impl Theory {
    pub fn new(name: &str, sentences: Vec<Formula>) -> Result<Theory, SyntaxError> {
        for s in &sentences {
            let free = s.free_variables();
            if !free.is_empty() {
                return Err(SyntaxError::NotASentence(render(s), free));
            }
        }
        Ok(Theory {
            name: name.to_owned(),
            sentences,
        })
    }

    pub fn empty() -> Theory {
        Theory::default()
    }

    pub fn check(&self, vocab: &Vocabulary) -> Result<(), SyntaxError> {
        self.sentences.iter().try_for_each(|s| s.check(vocab))
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// A finite set of formulas in the fixed free variables `x1..xn`, standing
/// in for a type `Σ(x̄)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSet {
    pub name: String,
    pub variables: Vec<String>,
    pub formulas: Vec<Formula>,
}

impl TypeSet {
    pub fn new(
        name: &str,
        variables: Vec<String>,
        formulas: Vec<Formula>,
    ) -> Result<TypeSet, SyntaxError> {
        let invalid = |message: String| SyntaxError::InvalidType {
            name: name.to_owned(),
            message,
        };
        if variables.is_empty() {
            return Err(invalid("a type needs at least one variable".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(invalid(format!("variable `{v}` listed twice")));
            }
        }
        for f in &formulas {
            if let Some(v) = f.free_variables().iter().find(|v| !variables.contains(v)) {
                return Err(invalid(format!("`{}` has undeclared free variable `{v}`", render(f))));
            }
        }
        Ok(TypeSet {
            name: name.to_owned(),
            variables,
            formulas,
        })
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    pub fn check(&self, vocab: &Vocabulary) -> Result<(), SyntaxError> {
        self.formulas.iter().try_for_each(|f| f.check(vocab))
    }

    /// `Σ(t1(ȳ), ..., tn(ȳ))`: the type obtained by substituting terms for
    /// the variables, now ranging over `new_variables`.
    pub fn substitute_terms(
        &self,
        terms: &[Term],
        new_variables: Vec<String>,
    ) -> Result<TypeSet, SyntaxError> {
        if terms.len() != self.variables.len() {
            return Err(SyntaxError::InvalidType {
                name: self.name.clone(),
                message: format!(
                    "{} terms supplied for {} variables",
                    terms.len(),
                    self.variables.len()
                ),
            });
        }
        let map: BTreeMap<String, Term> = self
            .variables
            .iter()
            .cloned()
            .zip(terms.iter().cloned())
            .collect();
        let formulas = self.formulas.iter().map(|f| f.substitute(&map)).collect();
        TypeSet::new(&self.name, new_variables, formulas)
    }

    /// Renames the variable tuple positionally.
    pub fn with_variables(&self, variables: Vec<String>) -> Result<TypeSet, SyntaxError> {
        let terms: Vec<Term> = variables.iter().map(|v| Term::Var(v.clone())).collect();
        self.substitute_terms(&terms, variables)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theory_rejects_open_formulas() {
        let open = Formula::pred("P", vec![Term::var("x")]);
        assert!(matches!(
            Theory::new("T", vec![open]),
            Err(SyntaxError::NotASentence(..))
        ));
    }

    #[test]
    fn type_variable_containment() {
        let f = Formula::pred("P", vec![Term::var("y")]);
        assert!(TypeSet::new("S", vec!["x".into()], vec![f.clone()]).is_err());
        assert!(TypeSet::new("S", vec![], vec![]).is_err());
        let t = TypeSet::new("S", vec!["y".into()], vec![f]).unwrap();
        let s = t.substitute_terms(&[Term::var("z")], vec!["z".into()]).unwrap();
        assert_eq!(s.formulas[0], Formula::pred("P", vec![Term::var("z")]));
    }
}
