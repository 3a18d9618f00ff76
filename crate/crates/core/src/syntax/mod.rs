//! Vocabularies, signatures, terms and formulas: the abstract syntax, its
//! parser and renderer, and abbreviation expansion.

mod formula;
mod parser;
mod render;
mod theory;
mod vocabulary;

use thiserror::Error;

pub use formula::{fresh_variable, Formula, Term};
pub use parser::{parse_formula, parse_term};
pub use render::render;
pub use theory::{Theory, TypeSet};
pub use vocabulary::{is_identifier, Signature, SymbolKind, Vocabulary, RESERVED};

use crate::scalar::format_rational;
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SyntaxError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} argument(s), found {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("constant {} lies outside [0,1]", format_rational(.0))]
    ConstantOutOfRange(Rational),
    #[error("`{0}` is reserved or not an identifier")]
    ReservedName(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("bad modulus for `{symbol}`: {message}")]
    InvalidModulus { symbol: String, message: String },
    #[error("`{0}` is not a sentence (free variables: {1:?})")]
    NotASentence(String, Vec<String>),
    #[error("type `{name}`: {message}")]
    InvalidType { name: String, message: String },
}

impl SyntaxError {
    pub(crate) fn arity(symbol: &str, expected: usize, found: usize) -> Self {
        SyntaxError::Arity {
            symbol: symbol.to_owned(),
            expected,
            found,
        }
    }
}
