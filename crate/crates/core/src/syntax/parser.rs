//! Recursive-descent parser for the clause language.
//!
//! ```text
//! program  := clause*
//! clause   := atom "<-" constrs "<>" atom "."
//! query    := atom ":" constrs "."
//! constrs  := "true" | constr ("," constr)*
//! constr   := expr rel expr
//! expr     := product (("+" | "-") product)*
//! product  := unary (("*" | "/") unary)*
//! unary    := "-" unary | number | var | "(" expr ")"
//! ```
//!
//! Products and quotients are accepted only when the result stays linear.
//! `#` starts a line comment, except directly after a variable name where
//! `X#3` denotes the renamed variable `X` of generation 3.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{normalize_clause_with, Atom, AtomicProp, Constraint, LinTerm, Pred, Program, Query, Rel, Var};
use crate::error::SyntaxError;
use crate::linarith::{Rational, Solver};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Upper(String),
    Lower(String),
    Num(BigInt),
    Arrow,
    Diamond,
    Colon,
    Comma,
    Dot,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Rel(Rel),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Upper(s) | Tok::Lower(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Arrow => "`<-`".into(),
            Tok::Diamond => "`<>`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Rel(r) => format!("`{}`", r.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
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
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if c.is_ascii_uppercase() {
                while i + 1 < chars.len() && chars[i] == '#' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((
                if c.is_ascii_uppercase() {
                    Tok::Upper(word)
                } else {
                    Tok::Lower(word)
                },
                pos,
            ));
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let n = digits
                .parse::<BigInt>()
                .map_err(|e| err(pos.line, pos.column, e.to_string()))?;
            out.push((Tok::Num(n), pos));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('<', Some('-')) => (Tok::Arrow, 2),
            ('<', Some('>')) => (Tok::Diamond, 2),
            ('<', Some('=')) => (Tok::Rel(Rel::Le), 2),
            ('>', Some('=')) => (Tok::Rel(Rel::Ge), 2),
            ('<', _) => (Tok::Rel(Rel::Lt), 1),
            ('>', _) => (Tok::Rel(Rel::Gt), 1),
            ('=', _) => (Tok::Rel(Rel::Eq), 1),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            _ => return Err(err(line, col, format!("unexpected character `{c}`"))),
        };
        i += len;
        col += len;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

fn parse_var(word: &str) -> Var {
    match word.rsplit_once('#') {
        Some((name, idx)) => match idx.parse::<u32>() {
            Ok(i) if i > 0 => Var::indexed(name, i),
            _ => Var::new(word),
        },
        None => Var::new(word),
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    arities: BTreeMap<String, usize>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            arities: BTreeMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let p = self.pos();
        SyntaxError::Parse {
            line: p.line,
            column: p.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, SyntaxError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let (tok, pos) = self.bump();
        let name = match tok {
            Tok::Lower(name) => name,
            other => {
                return Err(SyntaxError::Parse {
                    line: pos.line,
                    column: pos.column,
                    message: format!("expected a predicate name, found {}", other.describe()),
                })
            }
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            args.push(self.expr()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen)?;
        }
        let expected = *self.arities.entry(name.clone()).or_insert(args.len());
        if expected != args.len() {
            return Err(SyntaxError::ArityMismatch {
                pred: name,
                expected,
                found: args.len(),
                line: pos.line,
                column: pos.column,
            });
        }
        Ok(Atom::new(Pred::new(name, args.len()), args))
    }

    fn constraints(&mut self) -> Result<Constraint, SyntaxError> {
        if let Tok::Lower(w) = self.peek() {
            if w == "true" {
                self.bump();
                return Ok(Constraint::truth());
            }
        }
        let mut out = vec![self.constraint()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.constraint()?);
        }
        Ok(Constraint(out))
    }

    fn constraint(&mut self) -> Result<AtomicProp, SyntaxError> {
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Tok::Rel(r) => *r,
            other => {
                return Err(self.error(format!(
                    "expected a relation (=, <=, <, >=, >), found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(AtomicProp::new(lhs, rel, rhs))
    }

    fn expr(&mut self) -> Result<LinTerm, SyntaxError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<LinTerm, SyntaxError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let pos = self.bump().1;
                    let rhs = self.unary()?;
                    acc = if acc.is_constant() {
                        rhs.scale(acc.constant_part())
                    } else if rhs.is_constant() {
                        acc.scale(rhs.constant_part())
                    } else {
                        return Err(SyntaxError::Nonlinear {
                            line: pos.line,
                            column: pos.column,
                            detail: format!("({acc}) * ({rhs})"),
                        });
                    };
                }
                Tok::Slash => {
                    let pos = self.bump().1;
                    let rhs = self.unary()?;
                    if !rhs.is_constant() {
                        return Err(SyntaxError::Nonlinear {
                            line: pos.line,
                            column: pos.column,
                            detail: format!("division by ({rhs})"),
                        });
                    }
                    if rhs.constant_part().is_zero() {
                        return Err(SyntaxError::Parse {
                            line: pos.line,
                            column: pos.column,
                            message: "division by zero".into(),
                        });
                    }
                    acc = acc.scale(&(Rational::from_integer(1.into()) / rhs.constant_part()));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<LinTerm, SyntaxError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Minus => Ok(self.unary()?.neg()),
            Tok::Num(n) => Ok(LinTerm::constant(Rational::from_integer(n))),
            Tok::Upper(w) => Ok(LinTerm::var(parse_var(&w))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(SyntaxError::Parse {
                line: pos.line,
                column: pos.column,
                message: format!("expected a term, found {}", other.describe()),
            }),
        }
    }
}

/// Parses and normalizes a whole program.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    parse_program_with(&Solver::default(), text)
}

pub fn parse_program_with(solver: &Solver, text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    while *p.peek() != Tok::Eof {
        let line = p.pos().line;
        let head = p.atom()?;
        p.expect(Tok::Arrow)?;
        let c = p.constraints()?;
        p.expect(Tok::Diamond)?;
        let body = p.atom()?;
        p.expect(Tok::Dot)?;
        let clause = normalize_clause_with(solver, &head, &c, &body).map_err(|e| match e {
            SyntaxError::Unsatisfiable { text, .. } => SyntaxError::Unsatisfiable {
                clause: clauses.len() + 1,
                line,
                text,
            },
            other => other,
        })?;
        clauses.push(clause);
    }
    Program::new(clauses)
}

/// Parses `atom : constrs .` (the trailing dot is optional).
pub fn parse_query(text: &str) -> Result<Query, SyntaxError> {
    let mut p = Parser::new(text)?;
    let atom = p.atom()?;
    p.expect(Tok::Colon)?;
    let c = p.constraints()?;
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after query", p.peek().describe())));
    }
    Ok(Query::new(atom, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_unconstrained_clause() {
        let p = parse_program("p(A) <- true <> p(B).").unwrap();
        assert_eq!(p.len(), 1);
        let r = &p.clauses()[0];
        assert_eq!(r.head_pred().arity(), 1);
        assert!(r.constraint().is_true());
        assert_eq!(r.to_string(), "p(A) <- true <> p(B).");
    }

    #[test]
    fn parses_conjunction() {
        let p = parse_program("p(A) <- A = 0, B = 1 <> p(B).").unwrap();
        assert_eq!(p.clauses()[0].constraint().to_string(), "A = 0, B = 1");
    }

    #[test]
    fn rejects_nonlinear_product() {
        let err = parse_program("p(A) <- A*A = 1 <> p(A).").unwrap_err();
        assert!(matches!(err, SyntaxError::Nonlinear { line: 1, column: 10, .. }), "{err}");
        let err = parse_program("p(A) <- A / B = 1 <> p(B).").unwrap_err();
        assert!(matches!(err, SyntaxError::Nonlinear { .. }));
    }

    #[test]
    fn scalar_products_and_rationals() {
        let p = parse_program("p(A, B) <- B = 2*A + 1/2 - A/4, -(A) <= 3 <> p(B, A).").unwrap();
        let c = p.clauses()[0].constraint().to_string();
        assert_eq!(c, "B = 7/4*A + 1/2, -A <= 3, Y1 = B, Y2 = A");
    }

    #[test]
    fn reports_syntax_error_location() {
        let err = parse_program("p(A) <- true <> p(B)\nq(X) <- true <> q(Y).").unwrap_err();
        match err {
            SyntaxError::Parse { line, column, .. } => assert_eq!((line, column), (2, 1)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let err = parse_program("p(A) <- true <> p(B, C).").unwrap_err();
        assert!(matches!(err, SyntaxError::ArityMismatch { expected: 1, found: 2, .. }));
    }

    #[test]
    fn unsatisfiable_clause_names_its_index() {
        let err = parse_program("p(A) <- true <> p(B).\np(A) <- A = 0, B = 1, A = 1 <> p(B).")
            .unwrap_err();
        assert!(matches!(err, SyntaxError::Unsatisfiable { clause: 2, line: 2, .. }), "{err}");
    }

    #[test]
    fn comments_and_renamed_variables() {
        let p = parse_program("# a comment\np(X#3) <- X#3 >= 0 <> p(Y). # trailing").unwrap();
        assert_eq!(p.clauses()[0].head_vars()[0], Var::indexed("X", 3));
    }

    #[test]
    fn parses_queries() {
        let q = parse_query("p(0, X) : X >= 1.").unwrap();
        assert_eq!(q.to_string(), "p(0, X) : X >= 1");
        let q = parse_query("p : true").unwrap();
        assert_eq!(q.pred().arity(), 0);
    }

    #[test]
    fn empty_program() {
        assert!(parse_program("  # nothing\n").unwrap().is_empty());
    }
}
