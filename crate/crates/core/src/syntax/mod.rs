//! Shared surface syntax. Assertions, formulas, Horn clause dumps and template
//! rules all go through one expression parser; each front end then converts
//! the surface tree into its own AST and rejects constructs it does not allow.

mod lexer;

use std::fmt;

use thiserror::Error;

pub use lexer::{tokenize, Tok, Token};

use crate::logic::{Assertion, Linear, Rel, Term, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at line {}, column {}: expected {expected}, found {found}", pos.line, pos.column)]
pub struct ParseError {
    pub pos: Pos,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub fn at(pos: Pos, expected: impl Into<String>, found: impl Into<String>) -> Self {
        ParseError {
            pos,
            expected: expected.into(),
            found: found.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TempOp {
    AG,
    EG,
    AF,
    EF,
    AX,
    EX,
    AU,
    EU,
}

impl TempOp {
    fn from_keyword(s: &str) -> Option<TempOp> {
        Some(match s {
            "AG" => TempOp::AG,
            "EG" => TempOp::EG,
            "AF" => TempOp::AF,
            "EF" => TempOp::EF,
            "AX" => TempOp::AX,
            "EX" => TempOp::EX,
            "A" => TempOp::AU,
            "E" => TempOp::EU,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Quant {
        forall: bool,
        vars: Vec<Var>,
        body: Box<SNode>,
    },
    Or(Box<SNode>, Box<SNode>),
    And(Box<SNode>, Box<SNode>),
    Implies(Box<SNode>, Box<SNode>),
    Not(Box<SNode>),
    Paren(Box<SNode>),
    Temporal { op: TempOp, args: Vec<SNode> },
    True,
    False,
    Cmp(Term, Rel, Term),
    App(String, Vec<Var>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SNode {
    pub node: Node,
    pub pos: Pos,
}

impl SNode {
    /// True when the subtree is a quantifier-free theory assertion.
    pub fn is_pure(&self) -> bool {
        match &self.node {
            Node::True | Node::False | Node::Cmp(..) => true,
            Node::Or(a, b) | Node::And(a, b) | Node::Implies(a, b) => a.is_pure() && b.is_pure(),
            Node::Not(a) | Node::Paren(a) => a.is_pure(),
            Node::Quant { .. } | Node::Temporal { .. } | Node::App(..) => false,
        }
    }

    pub fn strip_parens(&self) -> &SNode {
        match &self.node {
            Node::Paren(inner) => inner.strip_parens(),
            _ => self,
        }
    }
}

const KEYWORDS: &[&str] = &["true", "false", "forall", "exists"];

pub struct Parser {
    toks: Vec<Token>,
    idx: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(src)?,
            idx: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.idx + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].tok.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn error(&self, expected: &str) -> ParseError {
        ParseError::at(self.pos(), expected, self.peek().to_string())
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(&t.to_string()))
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("identifier")),
        }
    }

    pub fn var(&mut self) -> Result<Var, ParseError> {
        let name = self.ident()?;
        Ok(if self.eat(&Tok::Prime) {
            Var::primed(name)
        } else {
            Var::new(name)
        })
    }

    pub fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.error("integer")),
        }
    }

    pub fn expr(&mut self) -> Result<SNode, ParseError> {
        if self.is_keyword("forall") || self.is_keyword("exists") {
            return self.quant();
        }
        self.disj()
    }

    fn quant(&mut self) -> Result<SNode, ParseError> {
        let pos = self.pos();
        let forall = self.is_keyword("forall");
        self.bump();
        let mut vars = vec![self.var()?];
        while self.eat(&Tok::Comma) {
            vars.push(self.var()?);
        }
        if !self.eat(&Tok::Colon) && !self.eat(&Tok::Dot) {
            return Err(self.error("`:` or `.`"));
        }
        let body = self.expr()?;
        Ok(SNode {
            node: Node::Quant {
                forall,
                vars,
                body: Box::new(body),
            },
            pos,
        })
    }

    fn disj(&mut self) -> Result<SNode, ParseError> {
        let mut lhs = self.conj()?;
        while matches!(self.peek(), Tok::OrOr) {
            let pos = self.pos();
            self.bump();
            let rhs = self.conj()?;
            lhs = SNode {
                node: Node::Or(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<SNode, ParseError> {
        let mut lhs = self.implication()?;
        while matches!(self.peek(), Tok::AndAnd) {
            let pos = self.pos();
            self.bump();
            let rhs = self.implication()?;
            lhs = SNode {
                node: Node::And(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<SNode, ParseError> {
        let lhs = self.unary()?;
        if matches!(self.peek(), Tok::Arrow) {
            let pos = self.pos();
            self.bump();
            let rhs = if self.is_keyword("forall") || self.is_keyword("exists") {
                self.quant()?
            } else {
                self.implication()?
            };
            return Ok(SNode {
                node: Node::Implies(Box::new(lhs), Box::new(rhs)),
                pos,
            });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<SNode, ParseError> {
        let pos = self.pos();
        let node = match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Node::Not(Box::new(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Node::Paren(Box::new(inner))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Node::True
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Node::False
            }
            Tok::Ident(s) if s == "forall" || s == "exists" => return self.quant(),
            Tok::Ident(s)
                if matches!(self.peek_at(1), Tok::LParen) && TempOp::from_keyword(&s).is_some() =>
            {
                let op = TempOp::from_keyword(&s).unwrap();
                self.bump();
                self.bump();
                let first = self.expr()?;
                let args = if matches!(op, TempOp::AU | TempOp::EU) {
                    self.expect_keyword("U")?;
                    let second = self.expr()?;
                    vec![first, second]
                } else {
                    vec![first]
                };
                self.expect(&Tok::RParen)?;
                Node::Temporal { op, args }
            }
            Tok::Ident(s) if matches!(self.peek_at(1), Tok::LParen) => {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    args.push(self.var()?);
                    while self.eat(&Tok::Comma) {
                        args.push(self.var()?);
                    }
                    self.expect(&Tok::RParen)?;
                }
                Node::App(s, args)
            }
            Tok::Ident(_) | Tok::Int(_) | Tok::Minus => {
                let l = self.term()?;
                let rel = self.rel()?;
                let r = self.term()?;
                Node::Cmp(l, rel, r)
            }
            _ => return Err(self.error("assertion or formula")),
        };
        Ok(SNode { node, pos })
    }

    fn rel(&mut self) -> Result<Rel, ParseError> {
        let r = match self.peek() {
            Tok::Eq => Rel::Eq,
            Tok::Neq => Rel::Ne,
            Tok::Lt => Rel::Lt,
            Tok::Le => Rel::Le,
            Tok::Gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            _ => return Err(self.error("comparison operator")),
        };
        self.bump();
        Ok(r)
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc = Linear::default();
        self.term_atom(&mut acc, 1)?;
        loop {
            let sign = match self.peek() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => break,
            };
            self.bump();
            self.term_atom(&mut acc, sign)?;
        }
        Ok(Term::from_linear(acc))
    }

    fn term_atom(&mut self, acc: &mut Linear, mut sign: i64) -> Result<(), ParseError> {
        if self.eat(&Tok::Minus) {
            sign = -sign;
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if self.eat(&Tok::Star) {
                    let v = self.var()?;
                    acc.add_term(v, sign * n);
                } else {
                    acc.constant += sign * n;
                }
                Ok(())
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let v = self.var()?;
                acc.add_term(v, sign);
                Ok(())
            }
            _ => Err(self.error("term")),
        }
    }
}

/// Parses a complete expression, rejecting trailing input.
pub fn parse_complete(src: &str) -> Result<SNode, ParseError> {
    let mut p = Parser::new(src)?;
    let n = p.expr()?;
    p.expect_eof()?;
    Ok(n)
}

pub fn to_assertion(n: &SNode) -> Result<Assertion, ParseError> {
    Ok(match &n.node {
        Node::True => Assertion::True,
        Node::False => Assertion::False,
        Node::Cmp(l, r, t) => Assertion::Cmp(l.clone(), *r, t.clone()),
        Node::And(a, b) => Assertion::and(to_assertion(a)?, to_assertion(b)?),
        Node::Or(a, b) => Assertion::or(to_assertion(a)?, to_assertion(b)?),
        Node::Implies(a, b) => Assertion::implies(to_assertion(a)?, to_assertion(b)?),
        Node::Not(a) => Assertion::not(to_assertion(a)?),
        Node::Paren(a) => to_assertion(a)?,
        Node::Quant { .. } => {
            return Err(ParseError::at(n.pos, "quantifier-free assertion", "quantifier"))
        }
        Node::Temporal { .. } => {
            return Err(ParseError::at(n.pos, "quantifier-free assertion", "temporal operator"))
        }
        Node::App(name, _) => {
            return Err(ParseError::at(
                n.pos,
                "quantifier-free assertion",
                format!("predicate application `{name}`"),
            ))
        }
    })
}

/// Splits a top-level `&&` chain without descending into parentheses.
pub fn flatten_and(n: &SNode) -> Vec<&SNode> {
    match &n.node {
        Node::And(a, b) => {
            let mut v = flatten_and(a);
            v.extend(flatten_and(b));
            v
        }
        _ => vec![n],
    }
}

pub fn flatten_or(n: &SNode) -> Vec<&SNode> {
    match &n.node {
        Node::Or(a, b) => {
            let mut v = flatten_or(a);
            v.extend(flatten_or(b));
            v
        }
        _ => vec![n],
    }
}
