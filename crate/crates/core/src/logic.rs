//! Terms and quantifier-free assertions over linear integer arithmetic.
//!
//! This is the background theory every other layer builds on: formula atoms,
//! system `init`/`next` relations and the constraint parts of Horn clauses are
//! all [`Assertion`]s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{self, ParseError};

/// A variable occurrence. Primed variables denote post-state values and only
/// appear inside transition relations and generated constraints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub primed: bool,
}

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var {
            name: name.into(),
            primed: false,
        }
    }

    pub fn primed(name: impl Into<String>) -> Self {
        Var {
            name: name.into(),
            primed: true,
        }
    }

    pub fn prime(&self) -> Self {
        Var {
            name: self.name.clone(),
            primed: true,
        }
    }

    pub fn unprime(&self) -> Self {
        Var::new(self.name.clone())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primed {
            write!(f, "{}'", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

/// Sum of integer-weighted variables plus a constant offset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Linear {
    /// Non-zero coefficients in first-occurrence order; each variable at most once.
    pub terms: Vec<(Var, i64)>,
    pub constant: i64,
}

impl Linear {
    pub fn constant(c: i64) -> Self {
        Linear {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        Linear {
            terms: vec![(v, 1)],
            constant: 0,
        }
    }

    pub fn add_term(&mut self, v: Var, k: i64) {
        if let Some(slot) = self.terms.iter_mut().find(|(w, _)| *w == v) {
            slot.1 += k;
        } else {
            self.terms.push((v, k));
        }
        self.terms.retain(|(_, k)| *k != 0);
    }

    pub fn add(&mut self, other: &Linear, scale: i64) {
        for (v, k) in &other.terms {
            self.add_term(v.clone(), k * scale);
        }
        self.constant += other.constant * scale;
    }
}

/// Integer term. Constructed through [`Term::from_linear`], which keeps the
/// representation in its simplest variant so structural equality is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(i64),
    Var(Var),
    Linear(Linear),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn from_linear(l: Linear) -> Term {
        match (l.terms.as_slice(), l.constant) {
            ([], c) => Term::Const(c),
            ([(v, 1)], 0) => Term::Var(v.clone()),
            _ => Term::Linear(l),
        }
    }

    pub fn to_linear(&self) -> Linear {
        match self {
            Term::Const(c) => Linear::constant(*c),
            Term::Var(v) => Linear::var(v.clone()),
            Term::Linear(l) => l.clone(),
        }
    }

    pub fn vars(&self) -> Vec<&Var> {
        match self {
            Term::Const(_) => Vec::new(),
            Term::Var(v) => vec![v],
            Term::Linear(l) => l.terms.iter().map(|(v, _)| v).collect(),
        }
    }

    pub fn eval(&self, s: &State) -> Result<i64, LogicError> {
        match self {
            Term::Const(c) => Ok(*c),
            Term::Var(v) => s.get(v),
            Term::Linear(l) => {
                let mut acc = l.constant;
                for (v, k) in &l.terms {
                    acc += k * s.get(v)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn substitute(&self, x: &Var, t: &Term) -> Term {
        let l = self.to_linear();
        let Some(k) = l.terms.iter().find(|(v, _)| v == x).map(|(_, k)| *k) else {
            return self.clone();
        };
        let mut out = Linear::constant(l.constant);
        for (v, c) in &l.terms {
            if v == x {
                out.add(&t.to_linear(), k);
            } else {
                out.add_term(v.clone(), *c);
            }
        }
        Term::from_linear(out)
    }

    pub fn rename(&self, f: &impl Fn(&Var) -> Var) -> Term {
        match self {
            Term::Const(c) => Term::Const(*c),
            Term::Var(v) => Term::Var(f(v)),
            Term::Linear(l) => Term::Linear(Linear {
                terms: l.terms.iter().map(|(v, k)| (f(v), *k)).collect(),
                constant: l.constant,
            }),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Linear(l) => {
                for (i, (v, k)) in l.terms.iter().enumerate() {
                    let mag = k.unsigned_abs();
                    match (i == 0, *k < 0) {
                        (true, false) => {}
                        (true, true) => write!(f, "-")?,
                        (false, false) => write!(f, " + ")?,
                        (false, true) => write!(f, " - ")?,
                    }
                    if mag == 1 {
                        write!(f, "{v}")?;
                    } else {
                        write!(f, "{mag}*{v}")?;
                    }
                }
                if l.constant > 0 {
                    write!(f, " + {}", l.constant)?;
                } else if l.constant < 0 {
                    write!(f, " - {}", l.constant.unsigned_abs())?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }

    pub fn negate(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
}

/// Quantifier-free formula of the background theory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Assertion {
    Cmp(Term, Rel, Term),
    True,
    False,
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Not(Box<Assertion>),
    Implies(Box<Assertion>, Box<Assertion>),
}

impl Assertion {
    pub fn cmp(l: Term, r: Rel, t: Term) -> Assertion {
        Assertion::Cmp(l, r, t)
    }

    pub fn eq(l: Term, r: Term) -> Assertion {
        Assertion::Cmp(l, Rel::Eq, r)
    }

    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        Assertion::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Assertion) -> Assertion {
        Assertion::Not(Box::new(a))
    }

    pub fn implies(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Implies(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `True` for an empty list.
    pub fn conjoin(items: impl IntoIterator<Item = Assertion>) -> Assertion {
        items
            .into_iter()
            .reduce(Assertion::and)
            .unwrap_or(Assertion::True)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    /// Variables in order of first occurrence.
    pub fn vars_in_order(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        self.visit_vars(&mut |v| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Assertion::Cmp(l, _, r) => {
                l.vars().into_iter().for_each(&mut *f);
                r.vars().into_iter().for_each(f);
            }
            Assertion::True | Assertion::False => {}
            Assertion::And(a, b) | Assertion::Or(a, b) | Assertion::Implies(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Assertion::Not(a) => a.visit_vars(f),
        }
    }

    pub fn has_primed(&self) -> bool {
        self.free_vars().iter().any(|v| v.primed)
    }

    pub fn eval(&self, s: &State) -> Result<bool, LogicError> {
        Ok(match self {
            Assertion::Cmp(l, r, t) => r.holds(l.eval(s)?, t.eval(s)?),
            Assertion::True => true,
            Assertion::False => false,
            Assertion::And(a, b) => a.eval(s)? && b.eval(s)?,
            Assertion::Or(a, b) => a.eval(s)? || b.eval(s)?,
            Assertion::Not(a) => !a.eval(s)?,
            Assertion::Implies(a, b) => !a.eval(s)? || b.eval(s)?,
        })
    }

    pub fn substitute(&self, x: &Var, t: &Term) -> Assertion {
        self.map_terms(&|term| term.substitute(x, t))
    }

    pub fn rename(&self, f: &impl Fn(&Var) -> Var) -> Assertion {
        self.map_terms(&|term| term.rename(f))
    }

    /// Replaces every variable in `vars` by its primed copy.
    pub fn prime_vars(&self, vars: &[Var]) -> Assertion {
        self.rename(&|v| if vars.contains(v) { v.prime() } else { v.clone() })
    }

    fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Assertion {
        match self {
            Assertion::Cmp(l, r, t) => Assertion::Cmp(f(l), *r, f(t)),
            Assertion::True => Assertion::True,
            Assertion::False => Assertion::False,
            Assertion::And(a, b) => Assertion::and(a.map_terms(f), b.map_terms(f)),
            Assertion::Or(a, b) => Assertion::or(a.map_terms(f), b.map_terms(f)),
            Assertion::Not(a) => Assertion::not(a.map_terms(f)),
            Assertion::Implies(a, b) => Assertion::implies(a.map_terms(f), b.map_terms(f)),
        }
    }

    /// Theory negation pushed down to comparisons.
    pub fn negate(&self) -> Assertion {
        match self {
            Assertion::Cmp(l, r, t) => Assertion::Cmp(l.clone(), r.negate(), t.clone()),
            Assertion::True => Assertion::False,
            Assertion::False => Assertion::True,
            Assertion::And(a, b) => Assertion::or(a.negate(), b.negate()),
            Assertion::Or(a, b) => Assertion::and(a.negate(), b.negate()),
            Assertion::Not(a) => (**a).clone(),
            Assertion::Implies(a, b) => Assertion::and((**a).clone(), b.negate()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Assertion::Cmp(..) | Assertion::True | Assertion::False => 1,
            Assertion::And(a, b) | Assertion::Or(a, b) | Assertion::Implies(a, b) => {
                1 + a.size() + b.size()
            }
            Assertion::Not(a) => 1 + a.size(),
        }
    }

    /// Lowers to a slot-indexed form; `slot` maps each variable to its index.
    pub fn compile(
        &self,
        slot: &impl Fn(&Var) -> Option<usize>,
    ) -> Result<Compiled, LogicError> {
        let term = |t: &Term| -> Result<CompiledTerm, LogicError> {
            let l = t.to_linear();
            let mut coeffs = Vec::with_capacity(l.terms.len());
            for (v, k) in &l.terms {
                let s = slot(v).ok_or_else(|| LogicError::UnboundVariable(v.to_string()))?;
                coeffs.push((s, *k));
            }
            Ok(CompiledTerm {
                coeffs,
                constant: l.constant,
            })
        };
        Ok(match self {
            Assertion::Cmp(l, r, t) => Compiled::Cmp(term(l)?, *r, term(t)?),
            Assertion::True => Compiled::Const(true),
            Assertion::False => Compiled::Const(false),
            Assertion::And(a, b) => {
                Compiled::And(Box::new(a.compile(slot)?), Box::new(b.compile(slot)?))
            }
            Assertion::Or(a, b) => {
                Compiled::Or(Box::new(a.compile(slot)?), Box::new(b.compile(slot)?))
            }
            Assertion::Not(a) => Compiled::Not(Box::new(a.compile(slot)?)),
            Assertion::Implies(a, b) => Compiled::Or(
                Box::new(Compiled::Not(Box::new(a.compile(slot)?))),
                Box::new(b.compile(slot)?),
            ),
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Assertion::Or(..) => 1,
            Assertion::And(..) => 2,
            Assertion::Implies(..) => 3,
            _ => 4,
        }
    }

    pub(crate) fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Assertion::Cmp(l, r, t) => write!(f, "{l} {} {t}", r.symbol()),
            Assertion::True => write!(f, "true"),
            Assertion::False => write!(f, "false"),
            Assertion::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " || ")?;
                b.fmt_prec(f, 2)
            }
            Assertion::And(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " && ")?;
                b.fmt_prec(f, 3)
            }
            Assertion::Implies(a, b) => {
                a.fmt_prec(f, 4)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 3)
            }
            Assertion::Not(a) => {
                write!(f, "!")?;
                if matches!(**a, Assertion::Cmp(..)) {
                    write!(f, "({a})")
                } else {
                    a.fmt_prec(f, 4)
                }
            }
        }
    }

    /// True when printing needs parentheses to stand as one conjunct.
    pub(crate) fn is_compound(&self) -> bool {
        self.prec() < 4
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledTerm {
    pub coeffs: Vec<(usize, i64)>,
    pub constant: i64,
}

impl CompiledTerm {
    #[inline]
    pub fn eval(&self, vals: &[i64]) -> i64 {
        self.coeffs
            .iter()
            .fold(self.constant, |acc, (s, k)| acc + k * vals[*s])
    }
}

/// Slot-indexed assertion used in the inner loops of grounding and model checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compiled {
    Cmp(CompiledTerm, Rel, CompiledTerm),
    Const(bool),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Not(Box<Compiled>),
}

impl Compiled {
    pub fn eval(&self, vals: &[i64]) -> bool {
        match self {
            Compiled::Cmp(l, r, t) => r.holds(l.eval(vals), t.eval(vals)),
            Compiled::Const(b) => *b,
            Compiled::And(a, b) => a.eval(vals) && b.eval(vals),
            Compiled::Or(a, b) => a.eval(vals) || b.eval(vals),
            Compiled::Not(a) => !a.eval(vals),
        }
    }

    pub fn slots(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_slots(&mut out);
        out
    }

    fn collect_slots(&self, out: &mut BTreeSet<usize>) {
        match self {
            Compiled::Cmp(l, _, r) => {
                out.extend(l.coeffs.iter().map(|(s, _)| *s));
                out.extend(r.coeffs.iter().map(|(s, _)| *s));
            }
            Compiled::Const(_) => {}
            Compiled::And(a, b) | Compiled::Or(a, b) => {
                a.collect_slots(out);
                b.collect_slots(out);
            }
            Compiled::Not(a) => a.collect_slots(out),
        }
    }

    /// If this is an equation in which `target` occurs with coefficient ±1,
    /// returns the value of `target` forced by the other (assigned) slots.
    pub fn solve_for(&self, target: usize, vals: &[i64]) -> Option<i64> {
        let Compiled::Cmp(l, Rel::Eq, r) = self else {
            return None;
        };
        // l - r = 0, split into k*target + rest.
        let mut k = 0;
        let mut rest = l.constant - r.constant;
        for (s, c) in &l.coeffs {
            if *s == target {
                k += c;
            } else {
                rest += c * vals[*s];
            }
        }
        for (s, c) in &r.coeffs {
            if *s == target {
                k -= c;
            } else {
                rest -= c * vals[*s];
            }
        }
        match k {
            1 => Some(-rest),
            -1 => Some(rest),
            _ => None,
        }
    }
}

/// Valuation of (possibly primed) variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State(pub BTreeMap<Var, i64>);

impl State {
    pub fn new() -> Self {
        State(BTreeMap::new())
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        State(
            pairs
                .into_iter()
                .map(|(n, v)| {
                    let var = match n.strip_suffix('\'') {
                        Some(base) => Var::primed(base),
                        None => Var::new(n),
                    };
                    (var, v)
                })
                .collect(),
        )
    }

    pub fn get(&self, v: &Var) -> Result<i64, LogicError> {
        self.0
            .get(v)
            .copied()
            .ok_or_else(|| LogicError::UnboundVariable(v.to_string()))
    }

    pub fn set(&mut self, v: Var, value: i64) {
        self.0.insert(v, value);
    }

    pub fn with(&self, v: Var, value: i64) -> State {
        let mut s = self.clone();
        s.set(v, value);
        s
    }

    /// Union of two valuations where `post` is bound under primed names.
    pub fn with_post(&self, post: &State) -> State {
        let mut s = self.clone();
        for (v, x) in &post.0 {
            s.set(v.prime(), *x);
        }
        s
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, x)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}={x}")?;
        }
        Ok(())
    }
}

pub fn eval_assertion(a: &Assertion, s: &State) -> Result<bool, LogicError> {
    a.eval(s)
}

pub fn substitute(a: &Assertion, x: &Var, t: &Term) -> Assertion {
    a.substitute(x, t)
}

pub fn parse_assertion(text: &str) -> Result<Assertion, ParseError> {
    let node = syntax::parse_complete(text)?;
    syntax::to_assertion(&node)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = syntax::Parser::new(text)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}
