use std::fmt;

use super::{Formula, Term};
use crate::scalar::format_rational;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Renders a formula in the textual grammar accepted by
/// [`parse_formula`](super::parse_formula). Compound operands are
/// parenthesized, so the output re-parses to the same tree.
pub fn render(formula: &Formula) -> String {
    let mut out = String::new();
    write_formula(formula, &mut out);
    out
}

fn write_operand(formula: &Formula, out: &mut String) {
    match formula {
        Formula::Metric(..) | Formula::Pred(..) | Formula::Const(_) | Formula::Not(_) => {
            write_formula(formula, out)
        }
        _ => {
            out.push('(');
            write_formula(formula, out);
            out.push(')');
        }
    }
}

fn write_formula(formula: &Formula, out: &mut String) {
    match formula {
        Formula::Metric(a, b) => out.push_str(&format!("d({a},{b})")),
        Formula::Pred(p, args) => {
            out.push_str(p);
            if !args.is_empty() {
                out.push('(');
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&t.to_string());
                }
                out.push(')');
            }
        }
        Formula::Const(r) => out.push_str(&format_rational(r)),
        Formula::Implies(a, b) => binary(a, " -> ", b, out),
        Formula::Or(a, b) => binary(a, " \\/ ", b, out),
        Formula::And(a, b) => binary(a, " /\\ ", b, out),
        Formula::Not(a) => {
            out.push('~');
            write_operand(a, out);
        }
        Formula::Leq(a, r) => {
            write_operand(a, out);
            out.push_str(" <= ");
            out.push_str(&format_rational(r));
        }
        Formula::Geq(a, r) => {
            write_operand(a, out);
            out.push_str(" >= ");
            out.push_str(&format_rational(r));
        }
        Formula::Exists(x, a) => {
            out.push_str(&format!("E {x}. "));
            write_formula(a, out);
        }
        Formula::Forall(x, a) => {
            out.push_str(&format!("A {x}. "));
            write_formula(a, out);
        }
    }
}

fn binary(a: &Formula, op: &str, b: &Formula, out: &mut String) {
    write_operand(a, out);
    out.push_str(op);
    write_operand(b, out);
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}
