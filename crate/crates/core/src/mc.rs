//! Explicit-state model checking of CTL+FO on a bounded state space.
//!
//! Data quantifiers range over the same box as the program variables. Path
//! quantifiers are evaluated by fixpoints over the clipped state graph, where
//! computations are maximal: a state without successors ends its path.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Formula, PathFormula};
use crate::logic::{Assertion, Compiled};
use crate::system::{DomainBound, StateGraph, StateSpaceTooLarge, TransitionSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McError {
    #[error("formula is not closed: `{0}` is neither bound nor a program variable")]
    OpenFormula(String),
    #[error(transparent)]
    BoundTooLarge(#[from] StateSpaceTooLarge),
}

/// Evidence for an existential claim at one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Choice for the outermost data quantifier, with evidence for its body.
    Value {
        var: String,
        value: i64,
        inner: Option<Box<Witness>>,
    },
    /// A path starting at the state: `stem` followed by `cycle` repeated
    /// forever. With an empty `cycle` the stem ends in a goal state (until)
    /// or in a deadlock (globally).
    Path {
        stem: Vec<Vec<i64>>,
        cycle: Vec<Vec<i64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// One entry per initial state when the formula holds and starts with a
    /// data or path existential.
    pub witnesses: Vec<(Vec<i64>, Witness)>,
    /// First initial state (in enumeration order) where the formula fails.
    pub counterexample: Option<Vec<i64>>,
}

/// Checker over one system and bound; reusable across formulas.
pub struct ModelChecker<'a> {
    ts: &'a TransitionSystem,
    graph: StateGraph,
}

type Env = Vec<(String, i64)>;

impl<'a> ModelChecker<'a> {
    pub fn new(ts: &'a TransitionSystem, b: DomainBound) -> Result<Self, McError> {
        Ok(ModelChecker {
            ts,
            graph: StateGraph::build(ts, b)?,
        })
    }

    pub fn graph(&self) -> &StateGraph {
        &self.graph
    }

    fn check_closed(&self, f: &Formula) -> Result<(), McError> {
        crate::formula::check_closed(f, &self.ts.vars).map_err(|e| match e {
            crate::formula::FormulaError::Unbound(v) => McError::OpenFormula(v),
            other => McError::OpenFormula(other.to_string()),
        })
    }

    /// Whether `f` holds at every initial state, with witnesses.
    pub fn check(&self, f: &Formula) -> Result<Verdict, McError> {
        self.check_closed(f)?;
        let sat = self.sat(f, &mut Vec::new());
        let inits: Vec<usize> = (0..self.graph.len()).filter(|&i| self.graph.init[i]).collect();
        let counterexample = inits.iter().find(|&&i| !sat[i]).map(|&i| self.graph.values(i));
        let holds = counterexample.is_none();
        let mut witnesses = Vec::new();
        if holds {
            for &i in &inits {
                if let Some(w) = self.witness(f, i, &mut Vec::new()) {
                    witnesses.push((self.graph.values(i), w));
                }
            }
        }
        Ok(Verdict {
            holds,
            witnesses,
            counterexample,
        })
    }

    /// Truth of `f` at the state with the given values.
    pub fn holds_at(&self, values: &[i64], f: &Formula) -> Result<bool, McError> {
        self.check_closed(f)?;
        let i = self.graph.bound.encode(values);
        Ok(self.sat(f, &mut Vec::new())[i])
    }

    fn compile(&self, a: &Assertion, env: &Env) -> Compiled {
        let n = self.ts.vars.len();
        a.compile(&|v| {
            if v.primed {
                return None;
            }
            if let Some(k) = env.iter().rposition(|(x, _)| *x == v.name) {
                return Some(n + k);
            }
            self.ts.vars.iter().position(|x| *x == v.name)
        })
        .expect("closed formula")
    }

    fn sat(&self, f: &Formula, env: &mut Env) -> Vec<bool> {
        let g = &self.graph;
        let n = g.len();
        match f {
            Formula::Atom(a) => self.atom(a, env),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let universal = matches!(f, Formula::Forall(..));
                let mut acc = vec![universal; n];
                for d in g.bound.values() {
                    env.push((x.clone(), d));
                    let s = self.sat(body, env);
                    env.pop();
                    for i in 0..n {
                        acc[i] = if universal { acc[i] && s[i] } else { acc[i] || s[i] };
                    }
                }
                acc
            }
            Formula::And(a, b) => zip(self.sat(a, env), self.sat(b, env), |x, y| x && y),
            Formula::Or(a, b) => zip(self.sat(a, env), self.sat(b, env), |x, y| x || y),
            Formula::Implies(c, b) => zip(self.atom(c, env), self.sat(b, env), |x, y| !x || y),
            Formula::Not(a) => self.sat(a, env).into_iter().map(|x| !x).collect(),
            Formula::A(p) | Formula::E(p) => {
                let universal = matches!(f, Formula::A(..));
                match &**p {
                    PathFormula::Next(a) => {
                        let s = self.sat(a, env);
                        (0..n)
                            .map(|i| {
                                let succ = &g.succ[i];
                                if universal {
                                    !succ.is_empty() && succ.iter().all(|&j| s[j])
                                } else {
                                    succ.iter().any(|&j| s[j])
                                }
                            })
                            .collect()
                    }
                    PathFormula::Globally(a) => self.globally(universal, &self.sat(a, env)),
                    PathFormula::WeakUntil(a, b) => {
                        let (hold, goal) = (self.sat(a, env), self.sat(b, env));
                        self.weak_until(universal, &hold, &goal)
                    }
                    PathFormula::Until(a, b) => {
                        let (hold, goal) = (self.sat(a, env), self.sat(b, env));
                        self.until(universal, &hold, &goal).0
                    }
                    PathFormula::Finally(b) => {
                        let goal = self.sat(b, env);
                        self.until(universal, &vec![true; n], &goal).0
                    }
                }
            }
        }
    }

    fn atom(&self, a: &Assertion, env: &Env) -> Vec<bool> {
        let c = self.compile(a, env);
        let w = self.graph.width;
        let mut vals: Vec<i64> = vec![0; w];
        vals.extend(env.iter().map(|(_, d)| *d));
        (0..self.graph.len())
            .map(|i| {
                vals[..w].copy_from_slice(&self.graph.values(i));
                c.eval(&vals)
            })
            .collect()
    }

    fn globally(&self, universal: bool, phi: &[bool]) -> Vec<bool> {
        self.weak_until(universal, phi, &vec![false; phi.len()])
    }

    /// Greatest fixpoint of `goal || (hold && step)`. Universal: every
    /// successor stays. Existential: some successor stays, or the path ends here.
    fn weak_until(&self, universal: bool, hold: &[bool], goal: &[bool]) -> Vec<bool> {
        let g = &self.graph;
        let mut z: Vec<bool> = hold.iter().zip(goal).map(|(h, q)| *h || *q).collect();
        loop {
            let mut changed = false;
            for i in 0..g.len() {
                if !z[i] || goal[i] {
                    continue;
                }
                let succ = &g.succ[i];
                let keep = if universal {
                    succ.iter().all(|&j| z[j])
                } else {
                    succ.is_empty() || succ.iter().any(|&j| z[j])
                };
                if !keep {
                    z[i] = false;
                    changed = true;
                }
            }
            if !changed {
                return z;
            }
        }
    }

    /// Least fixpoint with the round in which each state entered, used to
    /// extract shortest witnesses. Universal steps need at least one successor.
    fn until(&self, universal: bool, hold: &[bool], goal: &[bool]) -> (Vec<bool>, Vec<usize>) {
        let g = &self.graph;
        let n = g.len();
        let mut z = goal.to_vec();
        let mut stage = vec![usize::MAX; n];
        for i in 0..n {
            if z[i] {
                stage[i] = 0;
            }
        }
        let mut round = 0;
        loop {
            round += 1;
            let prev = z.clone();
            let mut changed = false;
            for i in 0..n {
                if prev[i] || !hold[i] {
                    continue;
                }
                let succ = &g.succ[i];
                let add = if universal {
                    !succ.is_empty() && succ.iter().all(|&j| prev[j])
                } else {
                    succ.iter().any(|&j| prev[j])
                };
                if add {
                    z[i] = true;
                    stage[i] = round;
                    changed = true;
                }
            }
            if !changed {
                return (z, stage);
            }
        }
    }

    fn witness(&self, f: &Formula, i: usize, env: &mut Env) -> Option<Witness> {
        let g = &self.graph;
        match f {
            Formula::Exists(x, body) => {
                for d in g.bound.values() {
                    env.push((x.clone(), d));
                    let ok = self.sat(body, env)[i];
                    let inner = if ok { self.witness(body, i, env) } else { None };
                    env.pop();
                    if ok {
                        return Some(Witness::Value {
                            var: x.clone(),
                            value: d,
                            inner: inner.map(Box::new),
                        });
                    }
                }
                None
            }
            Formula::E(p) => {
                let path = match &**p {
                    PathFormula::Next(a) => {
                        let s = self.sat(a, env);
                        let j = *g.succ[i].iter().find(|&&j| s[j])?;
                        (vec![i, j], Vec::new())
                    }
                    PathFormula::Until(a, b) => {
                        let (hold, goal) = (self.sat(a, env), self.sat(b, env));
                        (self.until_path(i, &hold, &goal)?, Vec::new())
                    }
                    PathFormula::Finally(b) => {
                        let goal = self.sat(b, env);
                        (self.until_path(i, &vec![true; g.len()], &goal)?, Vec::new())
                    }
                    PathFormula::Globally(_) | PathFormula::WeakUntil(..) => {
                        let (hold, goal) = match &**p {
                            PathFormula::Globally(a) => (self.sat(a, env), vec![false; g.len()]),
                            PathFormula::WeakUntil(a, b) => (self.sat(a, env), self.sat(b, env)),
                            _ => unreachable!(),
                        };
                        let z = self.weak_until(false, &hold, &goal);
                        if !z[i] {
                            return None;
                        }
                        let mut path = vec![i];
                        loop {
                            let cur = *path.last().unwrap();
                            if goal[cur] || g.succ[cur].is_empty() {
                                break (path, Vec::new());
                            }
                            let j = *g.succ[cur].iter().find(|&&j| z[j]).expect("gfp member has a member successor");
                            if let Some(k) = path.iter().position(|&s| s == j) {
                                let cycle = path.split_off(k);
                                break (path, cycle);
                            }
                            path.push(j);
                        }
                    }
                };
                Some(Witness::Path {
                    stem: path.0.into_iter().map(|s| g.values(s)).collect(),
                    cycle: path.1.into_iter().map(|s| g.values(s)).collect(),
                })
            }
            _ => None,
        }
    }

    fn until_path(&self, i: usize, hold: &[bool], goal: &[bool]) -> Option<Vec<usize>> {
        let (z, stage) = self.until(false, hold, goal);
        if !z[i] {
            return None;
        }
        let mut path = vec![i];
        let mut cur = i;
        while !goal[cur] {
            cur = *self.graph.succ[cur]
                .iter()
                .filter(|&&j| z[j])
                .min_by_key(|&&j| stage[j])
                .expect("lfp member reaches the goal");
            path.push(cur);
        }
        Some(path)
    }

    /// Independent check that `w` justifies `f` at the state `values`.
    pub fn replay(&self, f: &Formula, values: &[i64], w: &Witness) -> bool {
        self.replay_in(f, values, w, &mut Vec::new())
    }

    fn replay_in(&self, f: &Formula, values: &[i64], w: &Witness, env: &mut Env) -> bool {
        let g = &self.graph;
        let holds_at = |f: &Formula, v: &[i64], env: &mut Env| {
            g.bound.encode(v) < g.len() && v.iter().all(|x| g.bound.contains(*x)) && self.sat(f, env)[g.bound.encode(v)]
        };
        match (f, w) {
            (Formula::Exists(x, body), Witness::Value { var, value, inner }) => {
                if x != var || !g.bound.contains(*value) {
                    return false;
                }
                env.push((x.clone(), *value));
                let ok = holds_at(body, values, env)
                    && inner.as_ref().is_none_or(|w| self.replay_in(body, values, w, env));
                env.pop();
                ok
            }
            (Formula::E(p), Witness::Path { stem, cycle }) => {
                let states: Vec<&Vec<i64>> = stem.iter().chain(cycle.iter()).collect();
                if states.first().map(|s| s.as_slice()) != Some(values) {
                    return false;
                }
                if states.iter().any(|s| s.len() != g.width || s.iter().any(|x| !g.bound.contains(*x))) {
                    return false;
                }
                let idx: Vec<usize> = states.iter().map(|s| g.bound.encode(s)).collect();
                let edge = |a: usize, b: usize| g.succ[a].contains(&b);
                if idx.windows(2).any(|w| !edge(w[0], w[1])) {
                    return false;
                }
                let at = |f: &Formula, k: usize, env: &mut Env| self.sat(f, env)[idx[k]];
                let last = idx.len() - 1;
                match &**p {
                    PathFormula::Next(a) => cycle.is_empty() && idx.len() == 2 && at(a, 1, env),
                    PathFormula::Until(a, b) => {
                        cycle.is_empty() && at(b, last, env) && (0..last).all(|k| at(a, k, env))
                    }
                    PathFormula::Finally(b) => cycle.is_empty() && at(b, last, env),
                    PathFormula::Globally(a) => {
                        let closed = if cycle.is_empty() {
                            g.succ[idx[last]].is_empty()
                        } else {
                            edge(idx[last], idx[stem.len()])
                        };
                        closed && (0..idx.len()).all(|k| at(a, k, env))
                    }
                    PathFormula::WeakUntil(a, b) => {
                        let reached = cycle.is_empty() && at(b, last, env) && (0..last).all(|k| at(a, k, env));
                        let closed = if cycle.is_empty() {
                            g.succ[idx[last]].is_empty()
                        } else {
                            edge(idx[last], idx[stem.len()])
                        };
                        reached || (closed && (0..idx.len()).all(|k| at(a, k, env)))
                    }
                }
            }
            _ => false,
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

pub fn mc(ts: &TransitionSystem, f: &Formula, b: DomainBound) -> Result<Verdict, McError> {
    ModelChecker::new(ts, b)?.check(f)
}

pub fn mc_state(ts: &TransitionSystem, values: &[i64], f: &Formula, b: DomainBound) -> Result<bool, McError> {
    ModelChecker::new(ts, b)?.holds_at(values, f)
}

fn state_text(ts: &TransitionSystem, values: &[i64]) -> String {
    let parts: Vec<String> = ts.vars.iter().zip(values).map(|(n, x)| format!("{n}={x}")).collect();
    format!("({})", parts.join(", "))
}

/// Line-oriented rendering: a verdict line, then per witness a `witness at`
/// line followed by indented `choose`, `stem` and `cycle` lines.
pub fn dump_verdict(ts: &TransitionSystem, v: &Verdict) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", if v.holds { "holds" } else { "fails" });
    if let Some(c) = &v.counterexample {
        let _ = writeln!(out, "fails at {}", state_text(ts, c));
    }
    for (s, w) in &v.witnesses {
        let _ = writeln!(out, "witness at {}", state_text(ts, s));
        let mut cur = Some(w);
        while let Some(w) = cur {
            match w {
                Witness::Value { var, value, inner } => {
                    let _ = writeln!(out, "  choose {var} = {value}");
                    cur = inner.as_deref();
                }
                Witness::Path { stem, cycle } => {
                    let stem: Vec<String> = stem.iter().map(|s| state_text(ts, s)).collect();
                    let _ = writeln!(out, "  stem {}", stem.join(" "));
                    if !cycle.is_empty() {
                        let cycle: Vec<String> = cycle.iter().map(|s| state_text(ts, s)).collect();
                        let _ = writeln!(out, "  cycle {}", cycle.join(" "));
                    }
                    cur = None;
                }
            }
        }
    }
    out
}
