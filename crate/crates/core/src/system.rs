//! Transition systems over integer variables and their bounded state spaces.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::logic::{Assertion, Compiled, State, Var};
use crate::syntax::{self, ParseError, Parser, Tok};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("primed variable `{0}` in init")]
    PrimedInInit(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid bound `{0}`: expected LO..HI with LO <= HI")]
pub struct InvalidBound(pub String);

/// Inclusive integer box `[lo, hi]` used to ground states and data quantifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DomainBound {
    pub lo: i64,
    pub hi: i64,
}

impl DomainBound {
    pub fn new(lo: i64, hi: i64) -> Result<Self, InvalidBound> {
        if lo > hi {
            return Err(InvalidBound(format!("{lo}..{hi}")));
        }
        Ok(DomainBound { lo, hi })
    }

    pub fn size(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn values(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }

    /// Number of tuples of the given width, or `None` on overflow.
    pub fn tuple_count(&self, width: usize) -> Option<u128> {
        (self.size() as u128).checked_pow(width as u32)
    }

    /// Index of a tuple in lexicographic order (first component most significant).
    pub fn encode(&self, tuple: &[i64]) -> usize {
        let k = self.size();
        tuple
            .iter()
            .fold(0usize, |acc, &x| acc * k + (x - self.lo) as usize)
    }

    pub fn decode(&self, mut idx: usize, width: usize) -> Vec<i64> {
        let k = self.size();
        let mut out = vec![0; width];
        for slot in out.iter_mut().rev() {
            *slot = self.lo + (idx % k) as i64;
            idx /= k;
        }
        out
    }

    /// All tuples of the given width in lexicographic order.
    pub fn tuples(&self, width: usize) -> impl Iterator<Item = Vec<i64>> + '_ {
        let n = self.tuple_count(width).unwrap_or(0) as usize;
        (0..n).map(move |i| self.decode(i, width))
    }
}

impl fmt::Display for DomainBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for DomainBound {
    type Err = InvalidBound;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidBound(s.to_string());
        let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        DomainBound::new(lo, hi).map_err(|_| bad())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    pub vars: Vec<String>,
    pub init: Assertion,
    pub next: Assertion,
}

impl TransitionSystem {
    pub fn new(vars: Vec<String>, init: Assertion, next: Assertion) -> Result<Self, SystemError> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(SystemError::DuplicateVariable(v.clone()));
            }
        }
        for v in init.vars_in_order() {
            if v.primed {
                return Err(SystemError::PrimedInInit(v.name));
            }
            if !vars.contains(&v.name) {
                return Err(SystemError::UndeclaredVariable(v.name));
            }
        }
        for v in next.vars_in_order() {
            if !vars.contains(&v.name) {
                return Err(SystemError::UndeclaredVariable(v.to_string()));
            }
        }
        Ok(TransitionSystem { vars, init, next })
    }

    pub fn state_vars(&self) -> Vec<Var> {
        self.vars.iter().map(Var::new).collect()
    }

    /// Slot layout used by [`StateGraph`]: unprimed variables first, then primed.
    fn slot(&self, v: &Var) -> Option<usize> {
        let i = self.vars.iter().position(|n| *n == v.name)?;
        Some(if v.primed { self.vars.len() + i } else { i })
    }

    pub fn state_from_values(&self, values: &[i64]) -> State {
        State(
            self.vars
                .iter()
                .zip(values)
                .map(|(n, x)| (Var::new(n), *x))
                .collect(),
        )
    }

    pub fn values_of(&self, s: &State) -> Option<Vec<i64>> {
        self.vars.iter().map(|n| s.get(&Var::new(n)).ok()).collect()
    }
}

impl fmt::Display for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {};", self.vars.join(", "))?;
        writeln!(f, "init {};", self.init)?;
        writeln!(f, "next {};", self.next)
    }
}

pub fn parse_system(text: &str) -> Result<TransitionSystem, SystemError> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("vars")?;
    let mut vars = vec![p.ident()?];
    while p.eat(&Tok::Comma) {
        vars.push(p.ident()?);
    }
    p.expect(&Tok::Semi)?;
    p.expect_keyword("init")?;
    let init = syntax::to_assertion(&p.expr()?)?;
    p.expect(&Tok::Semi)?;
    p.expect_keyword("next")?;
    let next = syntax::to_assertion(&p.expr()?)?;
    p.expect(&Tok::Semi)?;
    p.expect_eof()?;
    TransitionSystem::new(vars, init, next)
}

/// Successors of `s` inside the bound: all in-box `s'` with `next(s, s')`.
pub fn successors(ts: &TransitionSystem, s: &State, b: DomainBound) -> Vec<State> {
    let pre = ts.values_of(s).expect("state covers the system variables");
    let next = ts
        .next
        .compile(&|v| ts.slot(v))
        .expect("system validated at construction");
    let n = ts.vars.len();
    let mut vals = pre.clone();
    vals.resize(2 * n, 0);
    b.tuples(n)
        .filter(|post| {
            vals[n..].copy_from_slice(post);
            next.eval(&vals)
        })
        .map(|post| ts.state_from_values(&post))
        .collect()
}

/// True iff every state reachable inside the bound has an in-bound successor.
pub fn is_total(ts: &TransitionSystem, b: DomainBound) -> bool {
    let g = StateGraph::build(ts, b).expect("bound small enough for enumeration");
    let reach = g.reachable();
    (0..g.len()).all(|i| !reach[i] || !g.succ[i].is_empty())
}

/// Explicit state graph of a system clipped to a bound.
#[derive(Debug, Clone)]
pub struct StateGraph {
    pub bound: DomainBound,
    pub width: usize,
    pub init: Vec<bool>,
    pub succ: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("state space of {states} states exceeds the ceiling of {ceiling}")]
pub struct StateSpaceTooLarge {
    pub states: u128,
    pub ceiling: u128,
}

pub const STATE_CEILING: u128 = 1 << 20;

impl StateGraph {
    pub fn build(ts: &TransitionSystem, b: DomainBound) -> Result<StateGraph, StateSpaceTooLarge> {
        let n = ts.vars.len();
        let count = b.tuple_count(n).unwrap_or(u128::MAX);
        let pairs = count.saturating_mul(count);
        if count > STATE_CEILING || pairs > STATE_CEILING * 64 {
            return Err(StateSpaceTooLarge {
                states: count,
                ceiling: STATE_CEILING,
            });
        }
        let count = count as usize;
        let init_c = ts.init.compile(&|v| ts.slot(v)).expect("validated");
        let next_c = ts.next.compile(&|v| ts.slot(v)).expect("validated");
        let tuples: Vec<Vec<i64>> = b.tuples(n).collect();
        let mut vals = vec![0; 2 * n];
        let mut init = vec![false; count];
        let mut succ = vec![Vec::new(); count];
        for (i, t) in tuples.iter().enumerate() {
            vals[..n].copy_from_slice(t);
            init[i] = init_c.eval(&vals);
            succ[i] = successor_indices(&next_c, &mut vals, &tuples, n);
        }
        Ok(StateGraph {
            bound: b,
            width: n,
            init,
            succ,
        })
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn values(&self, i: usize) -> Vec<i64> {
        self.bound.decode(i, self.width)
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = self.init.clone();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&i| seen[i]).collect();
        while let Some(i) = queue.pop_front() {
            for &j in &self.succ[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }
}

fn successor_indices(next: &Compiled, vals: &mut [i64], tuples: &[Vec<i64>], n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (j, t) in tuples.iter().enumerate() {
        vals[n..].copy_from_slice(t);
        if next.eval(vals) {
            out.push(j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval_assertion;

    fn counter() -> TransitionSystem {
        parse_system("vars v; init v = 0; next v' = v + 1;").unwrap()
    }

    fn st(v: i64) -> State {
        State::from_pairs([("v", v)])
    }

    #[test]
    fn parses_counter() {
        let ts = counter();
        assert_eq!(ts.vars, vec!["v".to_string()]);
        assert_eq!(ts.init.to_string(), "v = 0");
        assert_eq!(ts.next.to_string(), "v' = v + 1");
    }

    #[test]
    fn parses_stutter() {
        let ts = parse_system("vars v; init true; next v' = v;").unwrap();
        assert_eq!(ts.init, Assertion::True);
    }

    #[test]
    fn undeclared_variable() {
        assert_eq!(
            parse_system("vars v; init w = 0; next v' = v;"),
            Err(SystemError::UndeclaredVariable("w".into()))
        );
    }

    #[test]
    fn primed_init_rejected() {
        assert!(matches!(
            parse_system("vars v; init v' = 0; next v' = v;"),
            Err(SystemError::PrimedInInit(_))
        ));
    }

    #[test]
    fn display_roundtrip() {
        let ts = parse_system("vars pc, a; init pc = 0 && a >= 0; next pc' = 1 - pc && (a' = a || a' = a + 1);")
            .unwrap();
        assert_eq!(parse_system(&ts.to_string()).unwrap(), ts);
    }

    #[test]
    fn counter_successor() {
        let b = DomainBound::new(-2, 2).unwrap();
        assert_eq!(successors(&counter(), &st(1), b), vec![st(2)]);
    }

    #[test]
    fn nondeterministic_successor_is_clipped() {
        let ts = parse_system("vars v; init true; next v' = v + 1 || v' = v;").unwrap();
        let b = DomainBound::new(-2, 2).unwrap();
        let oracle: Vec<State> = b
            .values()
            .map(st)
            .filter(|post| eval_assertion(&ts.next, &st(2).with_post(post)).unwrap())
            .collect();
        assert_eq!(successors(&ts, &st(2), b), oracle);
        assert_eq!(oracle, vec![st(2)]);
    }

    #[test]
    fn stutter_successor() {
        let ts = parse_system("vars v; init true; next v' = v;").unwrap();
        let b = DomainBound::new(-2, 2).unwrap();
        for v in b.values() {
            assert_eq!(successors(&ts, &st(v), b), vec![st(v)]);
        }
    }

    #[test]
    fn totality() {
        let stutter = parse_system("vars v; init true; next v' = v;").unwrap();
        assert!(is_total(&stutter, DomainBound::new(-2, 2).unwrap()));
        assert!(!is_total(&counter(), DomainBound::new(0, 3).unwrap()));
        let lazy = parse_system("vars v; init true; next v' = v || v' = v + 1;").unwrap();
        assert!(is_total(&lazy, DomainBound::new(-3, 5).unwrap()));
    }

    #[test]
    fn unreachable_deadlocks_do_not_break_totality() {
        let ts = parse_system("vars v; init v = 0; next v' = v && v <= 1 || v' = v + 1 && v > 1;").unwrap();
        assert!(is_total(&ts, DomainBound::new(0, 3).unwrap()));
    }

    #[test]
    fn encode_decode() {
        let b = DomainBound::new(-2, 2).unwrap();
        for (i, t) in b.tuples(3).enumerate() {
            assert_eq!(b.encode(&t), i);
        }
        assert_eq!(b.tuple_count(3), Some(125));
    }

    #[test]
    fn bound_parsing() {
        assert_eq!("-2..2".parse::<DomainBound>(), Ok(DomainBound { lo: -2, hi: 2 }));
        assert!("3..1".parse::<DomainBound>().is_err());
        assert!("3".parse::<DomainBound>().is_err());
    }

    #[test]
    fn state_graph_matches_successors() {
        let ts = parse_system("vars a, b; init a = 0; next a' = b && b' = a + 1 || a' = a && b' = b;").unwrap();
        let b = DomainBound::new(-1, 1).unwrap();
        let g = StateGraph::build(&ts, b).unwrap();
        for i in 0..g.len() {
            let s = ts.state_from_values(&g.values(i));
            let want: Vec<State> = successors(&ts, &s, b);
            let got: Vec<State> = g.succ[i].iter().map(|&j| ts.state_from_values(&g.values(j))).collect();
            assert_eq!(got, want);
        }
    }
}
