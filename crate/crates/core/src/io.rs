//! JSON formats for structures, signatures, theories, types, search spaces,
//! piecewise-linear specs, and reports. Rationals are strings such as
//! `"1/3"`; formulas are strings in the text grammar.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::connectives::{AffinePiece, ConnectiveError, PLSpec};
use crate::evaluator::{Counterexample, Entailment, TheoryReport, TvReport};
use crate::scalar::{format_rational, parse_rational};
use crate::structures::{tuples, Structure, StructureError, ValidationReport, ViolationKind};
use crate::syntax::{parse_formula, parse_term, render, Formula, Signature, SyntaxError, Theory, TypeSet, Vocabulary};
use crate::types::{
    Candidate, DeltaDetail, GeneratorVerdict, MetricPrincipalReport, Omission, OmegaCandidate, OmegaVerdict,
    SearchOutcome, SearchSpace, TypeDistance,
};
use crate::Rational;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{at}: `{text}` is not a rational")]
    Rational { at: String, text: String },
    #[error("{at}: {source}")]
    Syntax { at: String, source: SyntaxError },
    #[error("{at}: {source}")]
    Structure { at: String, source: StructureError },
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
}

fn invalid(at: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Invalid {
        at: at.into(),
        message: message.into(),
    }
}

fn rational(at: &str, text: &str) -> Result<Rational, IoError> {
    parse_rational(text).ok_or_else(|| IoError::Rational {
        at: at.to_owned(),
        text: text.to_owned(),
    })
}

fn formula(at: &str, text: &str, vocab: &Vocabulary) -> Result<Formula, IoError> {
    parse_formula(text, vocab).map_err(|source| IoError::Syntax {
        at: at.to_owned(),
        source,
    })
}

fn structural(at: &str) -> impl Fn(StructureError) -> IoError + '_ {
    move |source| IoError::Structure {
        at: at.to_owned(),
        source,
    }
}

fn r(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    universe: Vec<String>,
    #[serde(default)]
    metric: BTreeMap<String, String>,
    #[serde(default)]
    predicates: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    operations: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    constants: BTreeMap<String, String>,
}

fn split_key(key: &str) -> Vec<&str> {
    if key.is_empty() {
        Vec::new()
    } else {
        key.split(',').map(str::trim).collect()
    }
}

fn table_arity(at: &str, table: &BTreeMap<String, String>) -> Result<usize, IoError> {
    let mut arities = table.keys().map(|k| split_key(k).len());
    let first = arities.next().ok_or_else(|| invalid(at, "empty table"))?;
    if arities.any(|a| a != first) {
        return Err(invalid(at, "tuple keys of different lengths"));
    }
    Ok(first)
}

/// Index-aligned rows of a table keyed by comma-separated element names.
fn table_rows<'a>(
    at: &str,
    m: &Structure,
    table: &'a BTreeMap<String, String>,
    arity: usize,
) -> Result<Vec<&'a str>, IoError> {
    let mut rows: Vec<Option<&str>> = vec![None; m.size().pow(arity as u32)];
    for (key, value) in table {
        let mut index = 0;
        for name in split_key(key) {
            index = index * m.size() + m.element(name).map_err(structural(at))?;
        }
        rows[index] = Some(value);
    }
    rows.into_iter()
        .zip(tuples(m.size(), arity))
        .map(|(row, t)| {
            row.ok_or_else(|| {
                let names: Vec<&str> = t.iter().map(|&a| m.element_name(a)).collect();
                invalid(at, format!("missing entry for ({})", names.join(",")))
            })
        })
        .collect()
}

/// Reads a structure. Missing metric entries take the mirrored entry if
/// present, else 1; the diagonal is 0.
pub fn read_structure(text: &str) -> Result<Structure, IoError> {
    let doc: StructureDoc = serde_json::from_str(text)?;
    if let Some(bad) = doc.universe.iter().find(|n| n.contains(',') || n.trim() != n.as_str()) {
        return Err(invalid("universe", format!("element name `{bad}` may not contain commas or padding")));
    }
    let mut m = Structure::discrete(&doc.universe).map_err(structural("universe"))?;
    let mut given: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    for (key, value) in &doc.metric {
        let at = format!("metric[{key}]");
        let parts = split_key(key);
        if parts.len() != 2 {
            return Err(invalid(at, "metric keys have the form \"a,b\""));
        }
        let a = m.element(parts[0]).map_err(structural(&at))?;
        let b = m.element(parts[1]).map_err(structural(&at))?;
        given.insert((a, b), rational(&at, value)?);
    }
    for a in 0..m.size() {
        for b in 0..m.size() {
            let v = match (given.get(&(a, b)), given.get(&(b, a))) {
                (Some(v), _) | (None, Some(v)) => v.clone(),
                (None, None) if a == b => Rational::from_integer(0.into()),
                (None, None) => Rational::from_integer(1.into()),
            };
            m.set_distance_directed(a, b, v).map_err(structural("metric"))?;
        }
    }
    for (p, table) in &doc.predicates {
        let at = format!("predicates.{p}");
        let arity = table_arity(&at, table)?;
        let values = table_rows(&at, &m, table, arity)?
            .into_iter()
            .map(|v| rational(&at, v))
            .collect::<Result<_, _>>()?;
        m.add_predicate(p, arity, values).map_err(structural(&at))?;
    }
    for (f, table) in &doc.operations {
        let at = format!("operations.{f}");
        let arity = table_arity(&at, table)?;
        if arity == 0 {
            return Err(invalid(at, "0-ary operations belong under \"constants\""));
        }
        let values = table_rows(&at, &m, table, arity)?
            .into_iter()
            .map(|v| m.element(v).map_err(structural(&at)))
            .collect::<Result<_, _>>()?;
        m.add_operation(f, arity, values).map_err(structural(&at))?;
    }
    for (c, name) in &doc.constants {
        let at = format!("constants.{c}");
        let a = m.element(name).map_err(structural(&at))?;
        m.add_constant(c, a).map_err(structural(&at))?;
    }
    Ok(m)
}

fn tuple_key(m: &Structure, t: &[usize]) -> String {
    t.iter().map(|&a| m.element_name(a)).collect::<Vec<_>>().join(",")
}

/// Writes every ordered off-diagonal distance and every table entry.
pub fn structure_to_json(m: &Structure) -> Value {
    let mut doc = StructureDoc {
        universe: m.universe().to_vec(),
        ..Default::default()
    };
    for a in 0..m.size() {
        for b in 0..m.size() {
            if a != b {
                doc.metric
                    .insert(tuple_key(m, &[a, b]), format_rational(m.distance(a, b)));
            }
        }
    }
    for (p, table) in m.predicates() {
        let rows = tuples(m.size(), table.arity)
            .zip(&table.values)
            .map(|(t, v)| (tuple_key(m, &t), format_rational(v)))
            .collect();
        doc.predicates.insert(p.clone(), rows);
    }
    for (f, table) in m.operations() {
        let rows = tuples(m.size(), table.arity)
            .zip(&table.values)
            .map(|(t, &v)| (tuple_key(m, &t), m.element_name(v).to_owned()))
            .collect();
        doc.operations.insert(f.clone(), rows);
    }
    for (c, &a) in m.constants() {
        doc.constants.insert(c.clone(), m.element_name(a).to_owned());
    }
    serde_json::to_value(doc).expect("plain data")
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureDoc {
    #[serde(default)]
    predicates: BTreeMap<String, usize>,
    #[serde(default)]
    operations: BTreeMap<String, usize>,
    #[serde(default)]
    moduli: BTreeMap<String, Vec<(String, String)>>,
}

fn signature_from_doc(doc: SignatureDoc) -> Result<Signature, IoError> {
    let vocabulary = Vocabulary {
        predicates: doc.predicates,
        operations: doc.operations,
    };
    let mut sig = Signature::new(vocabulary);
    for (symbol, pairs) in doc.moduli {
        for (i, (e, d)) in pairs.iter().enumerate() {
            let at = format!("moduli.{symbol}[{i}]");
            sig = sig.with_modulus(&symbol, rational(&at, e)?, rational(&at, d)?);
        }
    }
    sig.validate().map_err(|source| IoError::Syntax {
        at: "signature".into(),
        source,
    })?;
    Ok(sig)
}

/// A signature: `predicates` and `operations` (arity maps, constants are
/// 0-ary operations) plus optional `moduli` lists of `[ε, δ]` pairs.
pub fn read_signature(text: &str) -> Result<Signature, IoError> {
    signature_from_doc(serde_json::from_str(text)?)
}

pub fn signature_to_json(sig: &Signature) -> Value {
    let doc = SignatureDoc {
        predicates: sig.vocabulary.predicates.clone(),
        operations: sig.vocabulary.operations.clone(),
        moduli: sig
            .moduli
            .iter()
            .map(|(s, pairs)| {
                let pairs = pairs.iter().map(|(e, d)| (format_rational(e), format_rational(d))).collect();
                (s.clone(), pairs)
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("plain data")
}

pub fn read_vocabulary(text: &str) -> Result<Vocabulary, IoError> {
    let vocab: Vocabulary = serde_json::from_str(text)?;
    vocab.validate().map_err(|source| IoError::Syntax {
        at: "vocabulary".into(),
        source,
    })?;
    Ok(vocab)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TheoryDoc {
    Named {
        #[serde(default = "default_theory_name")]
        name: String,
        sentences: Vec<String>,
    },
    Bare(Vec<String>),
}

fn default_theory_name() -> String {
    "T".into()
}

/// `{"name": ..., "sentences": [...]}` or a bare array of sentences.
pub fn read_theory(text: &str, vocab: &Vocabulary) -> Result<Theory, IoError> {
    let (name, sentences) = match serde_json::from_str(text)? {
        TheoryDoc::Named { name, sentences } => (name, sentences),
        TheoryDoc::Bare(sentences) => (default_theory_name(), sentences),
    };
    let parsed = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| formula(&format!("sentences[{i}]"), s, vocab))
        .collect::<Result<_, _>>()?;
    Theory::new(&name, parsed).map_err(|source| IoError::Syntax {
        at: "sentences".into(),
        source,
    })
}

pub fn theory_to_json(t: &Theory) -> Value {
    json!({
        "name": t.name,
        "sentences": t.sentences.iter().map(render).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeDoc {
    #[serde(default = "default_type_name")]
    name: String,
    variables: Vec<String>,
    formulas: Vec<String>,
}

fn default_type_name() -> String {
    "Sigma".into()
}

fn typeset_from_value(at: &str, value: Value, vocab: &Vocabulary) -> Result<TypeSet, IoError> {
    let doc: TypeDoc = serde_json::from_value(value)?;
    let formulas = doc
        .formulas
        .iter()
        .enumerate()
        .map(|(i, f)| formula(&format!("{at}formulas[{i}]"), f, vocab))
        .collect::<Result<_, _>>()?;
    TypeSet::new(&doc.name, doc.variables, formulas).map_err(|source| IoError::Syntax {
        at: format!("{at}type"),
        source,
    })
}

/// `{"name": ..., "variables": [...], "formulas": [...]}`.
pub fn read_typeset(text: &str, vocab: &Vocabulary) -> Result<TypeSet, IoError> {
    typeset_from_value("", serde_json::from_str(text)?, vocab)
}

/// An array of types, or a single type.
pub fn read_typesets(text: &str, vocab: &Vocabulary) -> Result<Vec<TypeSet>, IoError> {
    match serde_json::from_str(text)? {
        Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| typeset_from_value(&format!("[{i}]."), v, vocab))
            .collect(),
        other => Ok(vec![typeset_from_value("", other, vocab)?]),
    }
}

pub fn typeset_to_json(t: &TypeSet) -> Value {
    json!({
        "name": t.name,
        "variables": t.variables,
        "formulas": t.formulas.iter().map(render).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OmegaDoc {
    variables: Vec<String>,
    terms: Vec<String>,
    formula: String,
    threshold: String,
}

fn omega_from_value(at: &str, value: Value, vocab: &Vocabulary) -> Result<OmegaCandidate, IoError> {
    let doc: OmegaDoc = serde_json::from_value(value)?;
    let terms = doc
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            parse_term(t, vocab).map_err(|source| IoError::Syntax {
                at: format!("{at}terms[{i}]"),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(OmegaCandidate {
        variables: doc.variables,
        terms,
        formula: formula(&format!("{at}formula"), &doc.formula, vocab)?,
        threshold: rational(&format!("{at}threshold"), &doc.threshold)?,
    })
}

fn candidate_from_value(at: &str, value: Value, vocab: &Vocabulary) -> Result<Candidate, IoError> {
    match &value {
        Value::String(s) if s == "thickened" => Ok(Candidate::Thickened),
        Value::Object(o) if o.contains_key("terms") => Ok(Candidate::Omega(omega_from_value(at, value, vocab)?)),
        Value::Object(_) => Ok(Candidate::Generator(typeset_from_value(at, value, vocab)?)),
        _ => Err(invalid(at, "expected \"thickened\", a type, or a threshold candidate")),
    }
}

/// A generator candidate: a type (`Φ`), or an object with `variables`,
/// `terms`, `formula`, and `threshold`.
pub fn read_candidate(text: &str, vocab: &Vocabulary) -> Result<Candidate, IoError> {
    candidate_from_value("", serde_json::from_str(text)?, vocab)
}

/// A map from `δ` to a candidate, where `"thickened"` uses `Σ^δ` itself.
pub fn read_candidates(text: &str, vocab: &Vocabulary) -> Result<Vec<(Rational, Candidate)>, IoError> {
    let map: BTreeMap<String, Value> = serde_json::from_str(text)?;
    map.into_iter()
        .map(|(k, v)| {
            let at = format!("{k}.");
            Ok((rational(&k, &k)?, candidate_from_value(&at, v, vocab)?))
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDoc {
    signature: SignatureDoc,
    max_size: usize,
    truth_resolution: u32,
    #[serde(default = "one")]
    metric_resolution: u32,
    #[serde(default)]
    seed: u64,
}

fn one() -> u32 {
    1
}

pub fn read_space(text: &str) -> Result<SearchSpace, IoError> {
    let doc: SpaceDoc = serde_json::from_str(text)?;
    Ok(SearchSpace {
        signature: signature_from_doc(doc.signature)?,
        max_size: doc.max_size,
        truth_resolution: doc.truth_resolution,
        metric_resolution: doc.metric_resolution,
        seed: doc.seed,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceDoc {
    coefficients: Vec<String>,
    intercept: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PLSpecDoc {
    arity: usize,
    groups: Vec<Vec<PieceDoc>>,
}

/// `{"arity": n, "groups": [[{"coefficients": [...], "intercept": ...}]]}`.
pub fn read_plspec(text: &str) -> Result<PLSpec, IoError> {
    let doc: PLSpecDoc = serde_json::from_str(text)?;
    let mut groups = Vec::new();
    for (i, g) in doc.groups.iter().enumerate() {
        let mut pieces = Vec::new();
        for (j, p) in g.iter().enumerate() {
            let at = format!("groups[{i}][{j}]");
            let coefficients = p
                .coefficients
                .iter()
                .map(|c| rational(&at, c))
                .collect::<Result<_, _>>()?;
            pieces.push(AffinePiece::new(coefficients, rational(&at, &p.intercept)?));
        }
        groups.push(pieces);
    }
    PLSpec::new(doc.arity, groups).map_err(|e: ConnectiveError| invalid("spec", e.to_string()))
}

fn names(m: &Structure, t: &[usize]) -> Vec<String> {
    t.iter().map(|&a| m.element_name(a).to_owned()).collect()
}

pub fn theory_report_to_json(report: &TheoryReport<Rational>) -> Value {
    json!({
        "satisfied": report.satisfied,
        "failing": report
            .failing
            .iter()
            .map(|(f, v)| json!({"formula": render(f), "value": r(v)}))
            .collect::<Vec<_>>(),
    })
}

pub fn validation_to_json(report: &ValidationReport<Rational>) -> Value {
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            let (kind, extra) = match &v.kind {
                ViolationKind::MetricDiagonal => ("metric_diagonal", json!({})),
                ViolationKind::MetricSymmetry => ("metric_symmetry", json!({})),
                ViolationKind::MetricTriangle => ("metric_triangle", json!({})),
                ViolationKind::MetricNotGenuine => ("metric_not_genuine", json!({})),
                ViolationKind::Range { symbol } => ("range", json!({ "symbol": symbol })),
                ViolationKind::Modulus { symbol, epsilon, delta } => (
                    "modulus",
                    json!({"symbol": symbol, "epsilon": r(epsilon), "delta": r(delta)}),
                ),
                ViolationKind::Lipschitz { symbol } => ("lipschitz", json!({ "symbol": symbol })),
            };
            let mut obj = json!({
                "kind": kind,
                "witness": v.witness,
                "values": v.values.iter().map(r).collect::<Vec<_>>(),
            });
            if let (Value::Object(o), Value::Object(e)) = (&mut obj, extra) {
                o.extend(e);
            }
            obj
        })
        .collect();
    json!({ "passed": report.passed(), "violations": violations })
}

pub fn tv_report_to_json(report: &TvReport<Rational>) -> Value {
    json!({
        "passed": report.passed,
        "failures": report
            .failures
            .iter()
            .map(|f| json!({"formula": render(&f.formula), "threshold": r(&f.threshold), "best": r(&f.best)}))
            .collect::<Vec<_>>(),
    })
}

fn counterexample_to_json(c: &Counterexample<Rational>, family: &[Structure], labels: &[String]) -> Value {
    json!({
        "structure": labels.get(c.structure).cloned().unwrap_or_else(|| c.structure.to_string()),
        "tuple": names(&family[c.structure], &c.tuple),
        "formula": render(&c.formula),
        "value": r(&c.value),
    })
}

/// Structures in reports are named by `labels` (for instance file names).
pub fn entailment_to_json(e: &Entailment<Rational>, family: &[Structure], labels: &[String]) -> Value {
    json!({
        "holds": e.holds,
        "counterexample": e.counterexample.as_ref().map(|c| counterexample_to_json(c, family, labels)),
    })
}

pub fn generator_to_json(g: &GeneratorVerdict<Rational>, family: &[Structure], labels: &[String]) -> Value {
    json!({
        "holds": g.holds,
        "realization": g.realization.as_ref().map(|(i, t)| json!({
            "structure": labels.get(*i).cloned().unwrap_or_else(|| i.to_string()),
            "tuple": names(&family[*i], t),
        })),
        "entailment": entailment_to_json(&g.entailment, family, labels),
    })
}

pub fn omega_to_json(o: &OmegaVerdict<Rational>, family: &[Structure], labels: &[String]) -> Value {
    json!({
        "holds": o.holds,
        "generator": generator_to_json(&o.generator, family, labels),
        "threshold": entailment_to_json(&o.threshold, family, labels),
    })
}

pub fn metric_principal_to_json(
    report: &MetricPrincipalReport<Rational>,
    family: &[Structure],
    labels: &[String],
) -> Value {
    json!({
        "holds": report.holds,
        "verdicts": report
            .verdicts
            .iter()
            .map(|v| json!({
                "delta": r(&v.delta),
                "holds": v.holds,
                "detail": match &v.detail {
                    DeltaDetail::Generator(g) => generator_to_json(g, family, labels),
                    DeltaDetail::Omega(o) => omega_to_json(o, family, labels),
                },
            }))
            .collect::<Vec<_>>(),
    })
}

pub fn omission_to_json(o: &Omission<Rational>, m: &Structure) -> Value {
    json!({
        "omitted": o.omitted,
        "realizing": o.realizing.iter().map(|t| names(m, t)).collect::<Vec<_>>(),
        "witnesses": o
            .witnesses
            .iter()
            .map(|(t, f, v)| json!({"tuple": names(m, t), "formula": render(f), "value": r(v)}))
            .collect::<Vec<_>>(),
    })
}

pub fn search_to_json(outcome: &SearchOutcome) -> Value {
    match outcome {
        SearchOutcome::Found { structure, examined } => json!({
            "found": true,
            "examined": examined,
            "structure": structure_to_json(structure),
        }),
        SearchOutcome::Exhausted { examined } => json!({ "found": false, "examined": examined }),
    }
}

pub fn type_distance_to_json(d: &TypeDistance<Rational>) -> Value {
    json!({ "distance": r(&d.value), "realized": d.realized })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data");
    s.push('\n');
    s
}
