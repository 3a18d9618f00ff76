use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pavelka::connectives::{
    approx_lattice, certify, grid_error, half_approx, half_target, scale_dyadic, Approximation, ConnectiveTerm,
    Node, Scaling, Target,
};
use pavelka::evaluator::{check_theory, entails, tarski_vaught_check, Assignment, Evaluator};
use pavelka::io::{self, to_pretty};
use pavelka::scalar::{format_rational, parse_rational, ratio};
use pavelka::structures::{combine, lipschitz_check, reduct, rename, validate_structure, Renaming};
use pavelka::syntax::{parse_formula, render, Formula};
use pavelka::transforms::{
    order_theory, relativize_family, relativize_family_with, relativize_monadic, restrict_to_family,
    restrict_to_predicate, thicken, OrderTheorySpec, ThickenOptions,
};
use pavelka::types::{
    generator_check, metrically_principal_check, omega_principal_check, omits, realizes, search_model, Candidate,
    CompleteTypeRecord, RecordEquivalence, SearchOutcome,
};
use pavelka::{Rational, Structure, Theory, Vocabulary};

/// Terms whose formula tree is larger than this are printed only as a DAG.
const MAX_PRINTED_TREE: u128 = 4096;

#[derive(Parser)]
#[command(name = "pavelka", version, about = "Continuous logic over finite metric structures")]
struct Cli {
    /// Worker threads for parallel commands; PAVELKA_WORKERS takes precedence.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms, value ranges, and moduli of a signature.
    Validate {
        #[arg(long)]
        sig: PathBuf,
        #[arg(long = "struct")]
        structure: PathBuf,
    },
    /// Check that every symbol is 1-Lipschitz.
    Lipschitz {
        #[arg(long = "struct")]
        structure: PathBuf,
    },
    /// Print the exact value of a formula.
    Eval {
        #[arg(long = "struct")]
        structure: PathBuf,
        /// Formula text, or a file holding it.
        #[arg(long)]
        formula: String,
        /// Variable assignments `x=a`.
        #[arg(long = "assign", value_name = "VAR=ELEMENT")]
        assign: Vec<String>,
    },
    /// Check a structure against a theory.
    Check {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long)]
        theory: PathBuf,
    },
    /// Decide entailment between types over a family of structures.
    Entails {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Finite Tarski-Vaught test for a subset.
    TvTest {
        #[arg(long = "struct")]
        structure: PathBuf,
        /// Comma-separated element names.
        #[arg(long)]
        subset: String,
        /// JSON array of formulas in one free variable; element names may
        /// appear as constants.
        #[arg(long)]
        formulas: PathBuf,
        /// Comma-separated thresholds in (0,1).
        #[arg(long)]
        grid: String,
    },
    /// Build a connective term approximating a target.
    Approx(TermArgs),
    /// Certify a sup-norm error bound for an approximation.
    Certify {
        #[command(flatten)]
        term: TermArgs,
        /// Grid spacing; defaults to 1/(8n).
        #[arg(long)]
        h: Option<String>,
        /// Fail unless the certified bound is at most this.
        #[arg(long)]
        max_bound: Option<String>,
    },
    /// Relativize a formula to a discrete predicate or relation.
    Relativize {
        /// Vocabulary or signature JSON.
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, conflicts_with = "relation", required_unless_present = "relation")]
        pred: Option<String>,
        #[arg(long)]
        relation: Option<String>,
        /// Parameter variable for `--relation`; fresh when omitted.
        #[arg(long, requires = "relation")]
        param: Option<String>,
    },
    /// Restrict a structure to the positive part of a discrete predicate.
    Restrict {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long, conflicts_with = "relation", required_unless_present = "relation")]
        pred: Option<String>,
        #[arg(long, requires = "at")]
        relation: Option<String>,
        /// Parameter element for `--relation`.
        #[arg(long)]
        at: Option<String>,
    },
    /// Emit the discrete linear ordering theory.
    GenOrder {
        #[arg(long)]
        pred: String,
        #[arg(long)]
        lt: String,
        /// Vocabulary the new names must avoid.
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Thicken a type by δ.
    Thicken {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        max_conjunction: Option<usize>,
        #[arg(long, default_value_t = 4096)]
        max_formulas: usize,
    },
    /// Whether a tuple realizes a type.
    Realizes {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Comma-separated element names.
        #[arg(long)]
        tuple: String,
    },
    /// Whether a structure omits a type.
    Omits {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Generator, threshold, or metric principality checks.
    Principal {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        sigma: PathBuf,
        /// A generator type or threshold candidate; with `--deltas`, a map
        /// from δ to candidates.
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Comma-separated δ values for the metric check.
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Search for a finite model of a theory omitting types.
    Omit {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        types: PathBuf,
        /// Overrides the seed in the space file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Distance between two realized complete types.
    TypeDist {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        /// Compare records by agreement on these formulas instead of by
        /// isomorphism.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Combine two structures over the same vocabulary.
    Combine {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Restrict a structure to a subvocabulary.
    Reduct {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
    },
    /// Rename symbols with a JSON map.
    Rename {
        #[arg(long = "struct")]
        structure: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// Directory of structure files, taken in file-name order.
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    theory: Option<PathBuf>,
}

#[derive(Args)]
struct TermArgs {
    /// `half_approx(n)` against x/2.
    #[arg(long, conflicts_with_all = ["scale", "spec"])]
    half: bool,
    /// Dyadic scaling p/2^k as `p/2^k`, for instance `3/4`.
    #[arg(long, conflicts_with = "spec")]
    scale: Option<String>,
    /// Piecewise-linear spec JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: usize,
}

enum Verdict {
    Pass,
    Fail,
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_structure(path: &Path) -> Result<Structure> {
    io::read_structure(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    Ok(io::read_signature(&read(path)?)
        .with_context(|| format!("{}", path.display()))?
        .vocabulary)
}

fn load_theory(path: Option<&Path>, vocab: &Vocabulary) -> Result<Theory> {
    match path {
        Some(p) => io::read_theory(&read(p)?, vocab).with_context(|| format!("{}", p.display())),
        None => Ok(Theory::empty()),
    }
}

/// Literal formula text, or the contents of a file of that name.
fn formula_text(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        Ok(read(path)?.trim().to_owned())
    } else {
        Ok(arg.to_owned())
    }
}

fn load_family(args: &FamilyArgs) -> Result<(Vec<Structure>, Vec<String>, Theory)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.family)
        .with_context(|| format!("cannot read directory {}", args.family.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    if paths.is_empty() {
        bail!("{} holds no .json structures", args.family.display());
    }
    let mut family = Vec::new();
    let mut labels = Vec::new();
    for p in &paths {
        family.push(load_structure(p)?);
        labels.push(p.file_name().unwrap().to_string_lossy().into_owned());
    }
    let vocab = family[0].vocabulary();
    if let Some(i) = family.iter().position(|m| m.vocabulary() != vocab) {
        bail!("{} has a different vocabulary from {}", labels[i], labels[0]);
    }
    let theory = load_theory(args.theory.as_deref(), &vocab)?;
    Ok((family, labels, theory))
}

fn elements(m: &Structure, list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(|name| m.element(name.trim()).map_err(|e| anyhow!(e)))
        .collect()
}

fn rational_arg(text: &str) -> Result<Rational> {
    parse_rational(text).ok_or_else(|| anyhow!("`{text}` is not a rational"))
}

fn rationals(list: &str) -> Result<Vec<Rational>> {
    list.split(',').map(|s| rational_arg(s.trim())).collect()
}

fn workers(flag: usize) -> Result<usize> {
    match std::env::var("PAVELKA_WORKERS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow!("PAVELKA_WORKERS must be a positive integer, got `{v}`")),
        Err(_) => Ok(flag),
    }
    .and_then(|n: usize| if n == 0 { bail!("worker count must be positive") } else { Ok(n) })
}

/// `p/2^k` from text such as `3/4`.
fn dyadic(text: &str) -> Result<(u64, u32)> {
    let r = rational_arg(text)?;
    let p: u64 = r.numer().try_into().map_err(|_| anyhow!("`{text}` must be non-negative"))?;
    let q: u64 = r.denom().try_into().map_err(|_| anyhow!("`{text}` is too large"))?;
    if !q.is_power_of_two() {
        bail!("`{text}` is not dyadic");
    }
    Ok((p, q.trailing_zeros()))
}

fn build_term(args: &TermArgs) -> Result<(Approximation, Box<dyn Target>, Rational)> {
    if let Some(s) = &args.scale {
        let (p, k) = dyadic(s)?;
        let approx = scale_dyadic(p, k, args.n)?;
        let r = ratio(p as i64, 1i64 << k);
        return Ok((approx, Box::new(Scaling(r.clone())), r));
    }
    if let Some(path) = &args.spec {
        let spec = io::read_plspec(&read(path)?).with_context(|| format!("{}", path.display()))?;
        let approx = approx_lattice(&spec, args.n)?;
        let l = spec.lipschitz_bound();
        return Ok((approx, Box::new(spec), l));
    }
    if !args.half {
        bail!("choose one of --half, --scale, --spec");
    }
    let term = half_approx(args.n)?;
    let bound = ratio(1, args.n as i64);
    Ok((Approximation { term, bound }, Box::new(half_target()), ratio(1, 2)))
}

fn term_json(t: &ConnectiveTerm) -> Value {
    let dag: Vec<String> = t
        .nodes()
        .iter()
        .map(|n| match n {
            Node::Proj(i) => format!("x{}", i + 1),
            Node::Const(r) => format_rational(r),
            Node::Implies(a, b) => format!("#{a} -> #{b}"),
        })
        .collect();
    let tree = t.tree_size();
    json!({
        "arity": t.arity(),
        "dag_size": t.dag_size(),
        "tree_size": tree.to_string(),
        "lipschitz_bound": format_rational(&t.lipschitz_bound()),
        "term": (tree <= MAX_PRINTED_TREE).then(|| t.to_string()),
        "dag": dag,
    })
}

fn assignment(m: &Structure, items: &[String]) -> Result<Assignment> {
    items
        .iter()
        .map(|item| {
            let (var, elem) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("assignments have the form x=a, got `{item}`"))?;
            Ok((var.trim().to_owned(), m.element(elem.trim())?))
        })
        .collect()
}

fn record(path: &Path, family: &[Structure], labels: &[String]) -> Result<CompleteTypeRecord> {
    let v: Value = serde_json::from_str(&read(path)?).with_context(|| format!("{}", path.display()))?;
    let index = match &v["structure"] {
        Value::Number(n) => n.as_u64().map(|n| n as usize),
        Value::String(s) => labels.iter().position(|l| l == s),
        _ => None,
    }
    .filter(|&i| i < family.len())
    .ok_or_else(|| anyhow!("{}: \"structure\" must name a family file or index", path.display()))?;
    let tuple = v["tuple"]
        .as_array()
        .ok_or_else(|| anyhow!("{}: \"tuple\" must be an array of element names", path.display()))?
        .iter()
        .map(|e| {
            let name = e.as_str().ok_or_else(|| anyhow!("{}: element names are strings", path.display()))?;
            Ok(family[index].element(name)?)
        })
        .collect::<Result<_>>()?;
    Ok(CompleteTypeRecord { structure: index, tuple })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Verdict> {
    let out = cli.out.as_deref();
    let report = |value: &Value| emit(out, &to_pretty(value));
    let pool = rayon_pool(workers(cli.workers)?)?;
    match cli.command {
        Command::Validate { sig, structure } => {
            let sig = io::read_signature(&read(&sig)?).with_context(|| format!("{}", sig.display()))?;
            let m = load_structure(&structure)?;
            let r = validate_structure(&m, &sig)?;
            report(&io::validation_to_json(&r))?;
            Ok(r.passed().into())
        }
        Command::Lipschitz { structure } => {
            let r = lipschitz_check(&load_structure(&structure)?);
            report(&io::validation_to_json(&r))?;
            Ok(r.passed().into())
        }
        Command::Eval {
            structure,
            formula,
            assign,
        } => {
            let m = load_structure(&structure)?;
            let f = parse_formula(&formula_text(&formula)?, &m.vocabulary())?;
            let sigma = assignment(&m, &assign)?;
            let v = Evaluator::new(&m).eval(&f, &sigma)?;
            emit(out, &format!("{}\n", format_rational(&v)))?;
            Ok(Verdict::Pass)
        }
        Command::Check { structure, theory } => {
            let m = load_structure(&structure)?;
            let t = load_theory(Some(&theory), &m.vocabulary())?;
            let r = check_theory(&m, &t)?;
            report(&io::theory_report_to_json(&r))?;
            Ok(r.satisfied.into())
        }
        Command::Entails { family, gamma, sigma } => {
            let (family, labels, t) = load_family(&family)?;
            let vocab = family[0].vocabulary();
            let gamma = io::read_typeset(&read(&gamma)?, &vocab)?;
            let sigma = io::read_typeset(&read(&sigma)?, &vocab)?;
            let e = entails(&family, &t, &gamma, &sigma)?;
            report(&io::entailment_to_json(&e, &family, &labels))?;
            Ok(e.holds.into())
        }
        Command::TvTest {
            structure,
            subset,
            formulas,
            grid,
        } => {
            let m = load_structure(&structure)?;
            let mut vocab = m.vocabulary();
            for name in m.universe() {
                if !vocab.contains(name) {
                    vocab.operations.insert(name.clone(), 0);
                }
            }
            let texts: Vec<String> = serde_json::from_str(&read(&formulas)?)
                .with_context(|| format!("{}: expected an array of formulas", formulas.display()))?;
            let fs: Vec<Formula> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| parse_formula(t, &vocab).with_context(|| format!("formulas[{i}]")))
                .collect::<Result<_>>()?;
            let r = tarski_vaught_check(&m, &elements(&m, &subset)?, &fs, &rationals(&grid)?)?;
            report(&io::tv_report_to_json(&r))?;
            Ok(r.passed.into())
        }
        Command::Approx(args) => {
            let (approx, _, _) = build_term(&args)?;
            let mut v = term_json(&approx.term);
            v["bound"] = json!(format_rational(&approx.bound));
            report(&v)?;
            Ok(Verdict::Pass)
        }
        Command::Certify { term, h, max_bound } => {
            let (approx, target, l) = build_term(&term)?;
            let h = match h {
                Some(h) => rational_arg(&h)?,
                None => ratio(1, 8 * term.n as i64),
            };
            let (err, at, bound) = pool.install(|| -> Result<_> {
                let (err, at) = grid_error(&approx.term, target.as_ref(), &h)?;
                let bound = certify(&approx.term, target.as_ref(), &h, &l)?;
                Ok((err, at, bound))
            })?;
            let ok = match &max_bound {
                Some(m) => bound <= rational_arg(m)?,
                None => true,
            };
            report(&json!({
                "spacing": format_rational(&h),
                "grid_error": format_rational(&err),
                "witness": at.iter().map(format_rational).collect::<Vec<_>>(),
                "certified_bound": format_rational(&bound),
                "construction_bound": format_rational(&approx.bound),
                "within": ok,
            }))?;
            Ok(ok.into())
        }
        Command::Relativize {
            vocab,
            formula,
            pred,
            relation,
            param,
        } => {
            let vocab = load_vocabulary(&vocab)?;
            let f = parse_formula(&formula_text(&formula)?, &vocab)?;
            let v = match (pred, relation) {
                (Some(p), _) => json!({ "formula": render(&relativize_monadic(&f, &p)?) }),
                (None, Some(r)) => {
                    let (g, param) = match param {
                        Some(y) => (relativize_family_with(&f, &r, &y)?, y),
                        None => relativize_family(&f, &r)?,
                    };
                    json!({ "formula": render(&g), "parameter": param })
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            report(&v)?;
            Ok(Verdict::Pass)
        }
        Command::Restrict {
            structure,
            pred,
            relation,
            at,
        } => {
            let m = load_structure(&structure)?;
            let r = match (pred, relation, at) {
                (Some(p), _, _) => restrict_to_predicate(&m, &p)?,
                (None, Some(rel), Some(a)) => restrict_to_family(&m, &rel, m.element(&a)?)?,
                _ => unreachable!("clap requires --pred or --relation with --at"),
            };
            report(&io::structure_to_json(&r))?;
            Ok(Verdict::Pass)
        }
        Command::GenOrder { pred, lt, vocab } => {
            let base = match vocab {
                Some(p) => load_vocabulary(&p)?,
                None => Vocabulary::new(),
            };
            let t = order_theory(&OrderTheorySpec::new(&pred, &lt), &base)?;
            report(&io::theory_to_json(&t))?;
            Ok(Verdict::Pass)
        }
        Command::Thicken {
            vocab,
            sigma,
            delta,
            max_conjunction,
            max_formulas,
        } => {
            let vocab = load_vocabulary(&vocab)?;
            let sigma = io::read_typeset(&read(&sigma)?, &vocab)?;
            let opts = ThickenOptions {
                max_conjunction,
                max_formulas,
            };
            let t = thicken(&sigma, &rational_arg(&delta)?, &opts)?;
            report(&io::typeset_to_json(&t))?;
            Ok(Verdict::Pass)
        }
        Command::Realizes { structure, sigma, tuple } => {
            let m = load_structure(&structure)?;
            let sigma = io::read_typeset(&read(&sigma)?, &m.vocabulary())?;
            let t = elements(&m, &tuple)?;
            let ok = realizes(&m, &t, &sigma)?;
            let failing = pavelka::evaluator::first_unrealized(&m, &sigma, &t)?
                .map(|(f, v)| json!({"formula": render(&f), "value": format_rational(&v)}));
            report(&json!({ "realizes": ok, "failing": failing }))?;
            Ok(ok.into())
        }
        Command::Omits { structure, sigma } => {
            let m = load_structure(&structure)?;
            let sigma = io::read_typeset(&read(&sigma)?, &m.vocabulary())?;
            let o = omits(&m, &sigma)?;
            report(&io::omission_to_json(&o, &m))?;
            Ok(o.omitted.into())
        }
        Command::Principal {
            family,
            sigma,
            phi,
            deltas,
        } => {
            let (family, labels, t) = load_family(&family)?;
            let vocab = family[0].vocabulary();
            let sigma = io::read_typeset(&read(&sigma)?, &vocab)?;
            if let Some(deltas) = deltas {
                let candidates = match &phi {
                    Some(p) => io::read_candidates(&read(p)?, &vocab).with_context(|| format!("{}", p.display()))?,
                    None => Vec::new(),
                };
                let deltas = rationals(&deltas)?;
                let mut all = candidates;
                for d in &deltas {
                    if phi.is_none() && !all.iter().any(|(e, _)| e == d) {
                        all.push((d.clone(), Candidate::Thickened));
                    }
                }
                let r = metrically_principal_check(&family, &t, &sigma, &deltas, &all, &ThickenOptions::default())?;
                report(&io::metric_principal_to_json(&r, &family, &labels))?;
                return Ok(r.holds.into());
            }
            let phi = phi.ok_or_else(|| anyhow!("--phi is required without --deltas"))?;
            match io::read_candidate(&read(&phi)?, &vocab).with_context(|| format!("{}", phi.display()))? {
                Candidate::Omega(c) => {
                    let v = omega_principal_check(&family, &t, &sigma, &c)?;
                    report(&io::omega_to_json(&v, &family, &labels))?;
                    Ok(v.holds.into())
                }
                Candidate::Generator(g) => {
                    let v = generator_check(&family, &t, &g, &sigma)?;
                    report(&io::generator_to_json(&v, &family, &labels))?;
                    Ok(v.holds.into())
                }
                Candidate::Thickened => bail!("\"thickened\" needs --deltas"),
            }
        }
        Command::Omit {
            space,
            theory,
            types,
            seed,
        } => {
            let mut space = io::read_space(&read(&space)?).with_context(|| format!("{}", space.display()))?;
            if let Some(s) = seed {
                space.seed = s;
            }
            let vocab = space.signature.vocabulary.clone();
            let t = load_theory(Some(&theory), &vocab)?;
            let types = io::read_typesets(&read(&types)?, &vocab).with_context(|| format!("{}", types.display()))?;
            match search_model(&space, &t, &types, workers(cli.workers)?)? {
                SearchOutcome::Found { structure, examined } => {
                    eprintln!("examined {examined}");
                    report(&io::structure_to_json(&structure))?;
                    Ok(Verdict::Pass)
                }
                SearchOutcome::Exhausted { examined } => {
                    emit(out, &format!("EXHAUSTED {examined}\n"))?;
                    Ok(Verdict::Fail)
                }
            }
        }
        Command::TypeDist { family, p, q, corpus } => {
            let (family, labels, t) = load_family(&family)?;
            let p = record(&p, &family, &labels)?;
            let q = record(&q, &family, &labels)?;
            let eq = match corpus {
                Some(path) => {
                    let vocab = family[0].vocabulary();
                    let texts: Vec<String> = serde_json::from_str(&read(&path)?)
                        .with_context(|| format!("{}: expected an array of formulas", path.display()))?;
                    let fs = texts
                        .iter()
                        .map(|s| parse_formula(s, &vocab).map_err(|e| anyhow!(e)))
                        .collect::<Result<_>>()?;
                    RecordEquivalence::Corpus(fs)
                }
                None => RecordEquivalence::Isomorphism,
            };
            let d = pavelka::types::type_distance(&family, &t, &p, &q, &eq)?;
            report(&io::type_distance_to_json(&d))?;
            Ok(Verdict::Pass)
        }
        Command::Combine { left, right } => {
            let c = combine(&load_structure(&left)?, &load_structure(&right)?)?;
            report(&io::structure_to_json(&c.structure))?;
            Ok(Verdict::Pass)
        }
        Command::Reduct { structure, vocab } => {
            let r = reduct(&load_structure(&structure)?, &load_vocabulary(&vocab)?)?;
            report(&io::structure_to_json(&r))?;
            Ok(Verdict::Pass)
        }
        Command::Rename { structure, map } => {
            let map: BTreeMap<String, String> =
                serde_json::from_str(&read(&map)?).with_context(|| format!("{}", map.display()))?;
            let r = rename(&load_structure(&structure)?, &Renaming::new(map))?;
            report(&io::structure_to_json(&r))?;
            Ok(Verdict::Pass)
        }
    }
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| anyhow!(e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
