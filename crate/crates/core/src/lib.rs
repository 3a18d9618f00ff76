//! Continuous first-order logic over finite metric structures.
//!
//! Truth values live in `[0,1]` with `1` read as true. Connectives are built
//! from Łukasiewicz implication and rational constants; quantifiers are
//! `sup` and `inf`.

pub mod connectives;
pub mod evaluator;
pub mod io;
pub mod scalar;
pub mod structures;
pub mod syntax;
pub mod transforms;
pub mod types;

pub use scalar::Scalar;
pub use structures::{Structure, StructureError};
pub use syntax::{Formula, Signature, Term, Theory, TypeSet, Vocabulary};

/// Exact truth values.
pub type Rational = num_rational::BigRational;
/// Exact truth values with machine-word numerators, for fast enumeration.
pub type SmallRational = num_rational::Ratio<i64>;

pub type ExactStructure = Structure<Rational>;
pub type FloatStructure = Structure<f64>;
pub type Float32Structure = Structure<f32>;
