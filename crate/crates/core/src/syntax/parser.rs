//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := disj ( "->" formula )?            right associative
//! disj    := conj ( "\/" conj )*
//! conj    := cmp ( "/\" cmp )*
//! cmp     := unary ( ("<=" | ">=") literal )*
//! unary   := "~" unary | ("E" | "A") var+ "." formula | primary
//! primary := "(" formula ")" | literal | atom
//! atom    := "d" "(" term "," term ")" | Pred ( "(" term,* ")" )?
//! term    := var | const | op "(" term,* ")"
//! ```
//!
//! Unicode spellings (`→ ⊸ ¬ ∨ ∧ ≤ ≥ ∃ ∀`) are accepted as synonyms.

use num_traits::{One, Zero};

use super::{Formula, SyntaxError, Term, Vocabulary};
use crate::scalar::parse_rational;
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Arrow,
    LParen,
    RParen,
    Comma,
    Dot,
    Tilde,
    Or,
    And,
    Leq,
    Geq,
    Exists,
    Forall,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| SyntaxError::Parse {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            });
            *i += width;
            *col += width;
        };
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '~' | '¬' => push(Tok::Tilde, 1, &mut i, &mut col),
            '→' | '⊸' => push(Tok::Arrow, 1, &mut i, &mut col),
            '∨' => push(Tok::Or, 1, &mut i, &mut col),
            '∧' => push(Tok::And, 1, &mut i, &mut col),
            '≤' => push(Tok::Leq, 1, &mut i, &mut col),
            '≥' => push(Tok::Geq, 1, &mut i, &mut col),
            '∃' => push(Tok::Exists, 1, &mut i, &mut col),
            '∀' => push(Tok::Forall, 1, &mut i, &mut col),
            '-' if next == Some('>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '\\' if next == Some('/') => push(Tok::Or, 2, &mut i, &mut col),
            '/' if next == Some('\\') => push(Tok::And, 2, &mut i, &mut col),
            '<' if next == Some('=') => push(Tok::Leq, 2, &mut i, &mut col),
            '>' if next == Some('=') => push(Tok::Geq, 2, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let follows_digit =
                    |k: usize| chars.get(k + 1).is_some_and(|d| d.is_ascii_digit());
                if j < chars.len() && (chars[j] == '/' || chars[j] == '.') && follows_digit(j) {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let width = j - i;
                push(Tok::Number(s), width, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
                {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let tok = match s.as_str() {
                    "E" => Tok::Exists,
                    "A" => Tok::Forall,
                    _ => Tok::Ident(s),
                };
                let width = j - i;
                push(tok, width, &mut i, &mut col);
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vocab: &'a Vocabulary,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let t = &self.tokens[self.pos];
        SyntaxError::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.advance();
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.comparison()?;
        while *self.peek() == Tok::And {
            self.advance();
            acc = Formula::and(acc, self.comparison()?);
        }
        Ok(acc)
    }

    fn comparison(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Leq => {
                    self.advance();
                    acc = Formula::leq(acc, self.literal()?);
                }
                Tok::Geq => {
                    self.advance();
                    acc = Formula::geq(acc, self.literal()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn literal(&mut self) -> Result<Rational, SyntaxError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let r = parse_rational(&s).ok_or_else(|| self.error("malformed rational"))?;
                if r < Rational::zero() || r > Rational::one() {
                    return Err(SyntaxError::ConstantOutOfRange(r));
                }
                self.advance();
                Ok(r)
            }
            _ => Err(self.error("expected a rational literal")),
        }
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Tok::Tilde => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Exists | Tok::Forall => {
                let universal = *self.peek() == Tok::Forall;
                self.advance();
                let mut vars = Vec::new();
                while let Tok::Ident(name) = self.peek().clone() {
                    if self.vocab.contains(&name) || name == "d" {
                        return Err(self.error(format!("`{name}` cannot be bound")));
                    }
                    vars.push(name);
                    self.advance();
                }
                if vars.is_empty() {
                    return Err(self.error("expected a variable after quantifier"));
                }
                self.expect(Tok::Dot, "`.` after quantified variables")?;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall_many(&vars, body)
                } else {
                    Formula::exists_many(&vars, body)
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Number(_) => Ok(Formula::Const(self.literal()?)),
            Tok::Ident(name) => self.atom(name),
            _ => Err(self.error("expected a formula")),
        }
    }

    fn arguments(&mut self) -> Result<Vec<Term>, SyntaxError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.advance();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                Tok::Comma => {
                    self.advance();
                }
                Tok::RParen => {
                    self.advance();
                    return Ok(args);
                }
                _ => return Err(self.error("expected `,` or `)`")),
            }
        }
    }

    fn atom(&mut self, name: String) -> Result<Formula, SyntaxError> {
        if name == "d" {
            self.advance();
            let args = self.arguments()?;
            if args.len() != 2 {
                return Err(SyntaxError::arity("d", 2, args.len()));
            }
            let mut it = args.into_iter();
            return Ok(Formula::Metric(it.next().unwrap(), it.next().unwrap()));
        }
        match self.vocab.predicate_arity(&name) {
            Some(arity) => {
                self.advance();
                let args = if *self.peek() == Tok::LParen {
                    self.arguments()?
                } else {
                    Vec::new()
                };
                if args.len() != arity {
                    return Err(SyntaxError::arity(&name, arity, args.len()));
                }
                Ok(Formula::Pred(name, args))
            }
            None if self.vocab.operation_arity(&name).is_some() => {
                Err(self.error(format!("operation `{name}` used where a formula is expected")))
            }
            None => Err(SyntaxError::UnknownSymbol(name)),
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let name = match self.peek().clone() {
            Tok::Ident(name) => name,
            _ => return Err(self.error("expected a term")),
        };
        self.advance();
        if self.vocab.predicate_arity(&name).is_some() || name == "d" {
            return Err(self.error(format!("`{name}` is not a term")));
        }
        match self.vocab.operation_arity(&name) {
            Some(arity) => {
                let args = if *self.peek() == Tok::LParen {
                    self.arguments()?
                } else {
                    Vec::new()
                };
                if args.len() != arity {
                    return Err(SyntaxError::arity(&name, arity, args.len()));
                }
                Ok(Term::app(&name, args))
            }
            None => {
                if *self.peek() == Tok::LParen {
                    return Err(SyntaxError::UnknownSymbol(name));
                }
                Ok(Term::Var(name))
            }
        }
    }
}

/// Parses `text` as a formula over `vocab`.
pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula, SyntaxError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        vocab,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

/// Parses a term over `vocab`.
pub fn parse_term(text: &str, vocab: &Vocabulary) -> Result<Term, SyntaxError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        vocab,
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}
