//! Instantiation of a Horn system over a finite integer box.
//!
//! Every clause variable ranges over `[lo, hi]`. An instance whose body
//! constraints are false is dropped, existential heads become finite
//! disjunctions over in-box witnesses, and each well-founded predicate gets a
//! [`WfGroup`] describing the directed graph its atoms induce on tuples.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use super::{BodyLit, HeadFormula, HornClause, HornError, HornSystem};
use crate::logic::{Compiled, Var};
use crate::system::DomainBound;

pub const DEFAULT_ATOM_CEILING: u128 = 1_000_000;

/// Environment variable overriding [`DEFAULT_ATOM_CEILING`].
pub const ATOM_CEILING_ENV: &str = "CTLFO_ATOM_CEILING";

pub fn atom_ceiling() -> u128 {
    std::env::var(ATOM_CEILING_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_ATOM_CEILING)
}

pub type AtomId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAtom {
    pub pred: usize,
    pub args: Vec<i64>,
}

/// `pos /\ !neg -> head`, with the head in disjunctive normal form:
/// `[]` is false, and a clause whose head contains an empty conjunction is
/// never stored because it is trivially satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundClause {
    pub origin: usize,
    /// Values of the origin clause's free variables, in `HornClause::free_vars` order.
    pub binding: Vec<i64>,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
    pub head: Vec<Vec<AtomId>>,
}

/// Directed graph of a well-founded predicate: node `i` is `tuples[i]`, and
/// each atom `r(t, u)` is an edge that, when true, forces `level(t) > level(u)`
/// with levels ranging over `[0, tuples.len() - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfGroup {
    pub pred: usize,
    pub tuples: Vec<Vec<i64>>,
    pub edges: Vec<(AtomId, usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct GroundSystem {
    pub bound: DomainBound,
    /// Predicate names and arities, in name order.
    pub preds: Vec<(String, usize)>,
    pub atoms: Vec<GroundAtom>,
    index: HashMap<(usize, Vec<i64>), AtomId>,
    pub clauses: Vec<GroundClause>,
    pub wf: Vec<WfGroup>,
    /// Number of clause instances before any pruning: the sum over clauses of
    /// `box_size ^ free_variable_count`.
    pub instance_count: u128,
}

/// Positive body atoms, negated body atoms, head disjuncts (each a conjunction).
pub type PartsClause = (Vec<(usize, Vec<i64>)>, Vec<(usize, Vec<i64>)>, Vec<Vec<(usize, Vec<i64>)>>);

impl GroundSystem {
    pub fn empty(bound: DomainBound) -> Self {
        GroundSystem {
            bound,
            preds: Vec::new(),
            atoms: Vec::new(),
            index: HashMap::new(),
            clauses: Vec::new(),
            wf: Vec::new(),
            instance_count: 0,
        }
    }

    pub fn pred_index(&self, name: &str) -> Option<usize> {
        self.preds.iter().position(|(n, _)| n == name)
    }

    pub fn lookup(&self, pred: usize, args: &[i64]) -> Option<AtomId> {
        self.index.get(&(pred, args.to_vec())).copied()
    }

    pub fn atom_label(&self, id: AtomId) -> String {
        let a = &self.atoms[id];
        let args: Vec<String> = a.args.iter().map(|x| x.to_string()).collect();
        format!("{}({})", self.preds[a.pred].0, args.join(", "))
    }

    fn intern(&mut self, pred: usize, args: Vec<i64>) -> AtomId {
        if let Some(&id) = self.index.get(&(pred, args.clone())) {
            return id;
        }
        let id = self.atoms.len();
        self.atoms.push(GroundAtom {
            pred,
            args: args.clone(),
        });
        self.index.insert((pred, args), id);
        id
    }

    /// Builds a ground system directly; used by tests and the solver's own checks.
    pub fn from_parts(
        bound: DomainBound,
        preds: Vec<(String, usize)>,
        wf_preds: &[usize],
        clauses: Vec<PartsClause>,
    ) -> Self {
        let mut gs = GroundSystem::empty(bound);
        gs.preds = preds;
        for (i, (pos, neg, head)) in clauses.into_iter().enumerate() {
            let pos = pos.into_iter().map(|(p, a)| gs.intern(p, a)).collect();
            let neg = neg.into_iter().map(|(p, a)| gs.intern(p, a)).collect();
            let head = head
                .into_iter()
                .map(|d| d.into_iter().map(|(p, a)| gs.intern(p, a)).collect())
                .collect();
            gs.clauses.push(GroundClause {
                origin: i,
                binding: Vec::new(),
                pos,
                neg,
                head,
            });
        }
        gs.build_wf(wf_preds);
        gs
    }

    fn build_wf(&mut self, wf_preds: &[usize]) {
        for &p in wf_preds {
            let half = self.preds[p].1 / 2;
            let mut tuples: Vec<Vec<i64>> = Vec::new();
            let mut node: HashMap<Vec<i64>, usize> = HashMap::new();
            let mut edges = Vec::new();
            for (id, a) in self.atoms.iter().enumerate() {
                if a.pred != p {
                    continue;
                }
                let mut ends = [0usize; 2];
                for (k, part) in [&a.args[..half], &a.args[half..]].into_iter().enumerate() {
                    ends[k] = *node.entry(part.to_vec()).or_insert_with(|| {
                        tuples.push(part.to_vec());
                        tuples.len() - 1
                    });
                }
                edges.push((id, ends[0], ends[1]));
            }
            self.wf.push(WfGroup {
                pred: p,
                tuples,
                edges,
            });
        }
    }
}

impl fmt::Display for GroundSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            let mut body: Vec<String> = c.pos.iter().map(|&a| self.atom_label(a)).collect();
            body.extend(c.neg.iter().map(|&a| format!("!{}", self.atom_label(a))));
            let head: Vec<String> = c
                .head
                .iter()
                .map(|d| {
                    let lits: Vec<String> = d.iter().map(|&a| self.atom_label(a)).collect();
                    lits.join(" && ")
                })
                .collect();
            let body = if body.is_empty() { "true".to_string() } else { body.join(" && ") };
            let head = if head.is_empty() { "false".to_string() } else { head.join(" || ") };
            writeln!(f, "{body} => {head}")?;
        }
        for g in &self.wf {
            writeln!(f, "wf({}) over {} tuples", self.preds[g.pred].0, g.tuples.len())?;
        }
        Ok(())
    }
}

/// Slot-compiled head.
enum CHead {
    Const(Compiled),
    App(usize, Vec<usize>),
    And(Vec<CHead>),
    Or(Vec<CHead>),
    Guard(Compiled, Box<CHead>),
    Exists(Plan, Box<CHead>),
}

/// Enumeration plan for a block of slots: assign `slots` in order, using
/// `solve[i]` to force slot `i` from an equation when possible, and checking
/// `checks[i]` once slot `i` is assigned.
struct Plan {
    slots: Vec<usize>,
    solve: Vec<Option<Compiled>>,
    checks: Vec<Vec<Compiled>>,
    /// Constraints mentioning no slot of the block.
    upfront: Vec<Compiled>,
}

impl Plan {
    fn new(slots: Vec<usize>, constraints: Vec<Compiled>) -> Plan {
        let pos_of = |s: usize| slots.iter().position(|&x| x == s);
        let mut checks = vec![Vec::new(); slots.len()];
        let mut upfront = Vec::new();
        let mut solve: Vec<Option<Compiled>> = vec![None; slots.len()];
        for c in constraints {
            let used = c.slots();
            let last = used.iter().filter_map(|&s| pos_of(s)).max();
            match last {
                None => upfront.push(c),
                Some(p) => {
                    let target = slots[p];
                    if solve[p].is_none() && c.solve_for(target, &vec![0; 1 + used.iter().max().copied().unwrap_or(0)]).is_some() {
                        solve[p] = Some(c.clone());
                    }
                    checks[p].push(c);
                }
            }
        }
        Plan {
            slots,
            solve,
            checks,
            upfront,
        }
    }

    fn run(&self, vals: &mut Vec<i64>, b: DomainBound, f: &mut impl FnMut(&mut Vec<i64>)) {
        if self.upfront.iter().all(|c| c.eval(vals)) {
            self.step(0, vals, b, f);
        }
    }

    fn step(&self, i: usize, vals: &mut Vec<i64>, b: DomainBound, f: &mut impl FnMut(&mut Vec<i64>)) {
        if i == self.slots.len() {
            f(vals);
            return;
        }
        let slot = self.slots[i];
        let mut try_value = |x: i64, vals: &mut Vec<i64>| {
            vals[slot] = x;
            if self.checks[i].iter().all(|c| c.eval(vals)) {
                self.step(i + 1, vals, b, f);
            }
        };
        match self.solve[i].as_ref().and_then(|c| c.solve_for(slot, vals)) {
            Some(x) => {
                if b.contains(x) {
                    try_value(x, vals);
                }
            }
            None => {
                for x in b.values() {
                    try_value(x, vals);
                }
            }
        }
    }
}

struct Compiler<'a> {
    scope: Vec<(Var, usize)>,
    next_slot: usize,
    pred_ix: &'a HashMap<&'a str, usize>,
}

impl Compiler<'_> {
    fn slot(&self, v: &Var) -> Option<usize> {
        self.scope.iter().rev().find(|(w, _)| w == v).map(|(_, s)| *s)
    }

    fn assertion(&self, a: &crate::logic::Assertion) -> Compiled {
        a.compile(&|v| self.slot(v)).expect("clause variables are all in scope")
    }

    fn head(&mut self, h: &HeadFormula) -> CHead {
        match h {
            HeadFormula::Constraint(a) => CHead::Const(self.assertion(a)),
            HeadFormula::App(p) => CHead::App(
                self.pred_ix[p.name.as_str()],
                p.args.iter().map(|v| self.slot(v).unwrap()).collect(),
            ),
            HeadFormula::And(hs) => CHead::And(hs.iter().map(|x| self.head(x)).collect()),
            HeadFormula::Or(hs) => CHead::Or(hs.iter().map(|x| self.head(x)).collect()),
            HeadFormula::Guarded(c, inner) => {
                CHead::Guard(self.assertion(c), Box::new(self.head(inner)))
            }
            HeadFormula::Exists(vs, inner) => {
                let depth = self.scope.len();
                let mut slots = Vec::new();
                for v in vs {
                    self.scope.push((v.clone(), self.next_slot));
                    slots.push(self.next_slot);
                    self.next_slot += 1;
                }
                let filters: Vec<Compiled> = match &**inner {
                    HeadFormula::Constraint(a) => vec![self.assertion(a)],
                    HeadFormula::And(items) => items
                        .iter()
                        .filter_map(|i| match i {
                            HeadFormula::Constraint(a) => Some(self.assertion(a)),
                            _ => None,
                        })
                        .collect(),
                    _ => Vec::new(),
                };
                let body = self.head(inner);
                self.scope.truncate(depth);
                CHead::Exists(Plan::new(slots, filters), Box::new(body))
            }
        }
    }
}

type Key = (usize, Vec<i64>);
type Dnf = Vec<Vec<Key>>;

fn normalize(mut d: Dnf) -> Dnf {
    for conj in d.iter_mut() {
        conj.sort();
        conj.dedup();
    }
    if d.iter().any(|c| c.is_empty()) {
        return vec![Vec::new()];
    }
    d.sort();
    d.dedup();
    d
}

fn dnf(h: &CHead, vals: &mut Vec<i64>, b: DomainBound) -> Dnf {
    match h {
        CHead::Const(c) => {
            if c.eval(vals) {
                vec![Vec::new()]
            } else {
                Vec::new()
            }
        }
        CHead::App(p, slots) => vec![vec![(*p, slots.iter().map(|&s| vals[s]).collect())]],
        CHead::And(items) => {
            let mut acc: Dnf = vec![Vec::new()];
            for item in items {
                let d = dnf(item, vals, b);
                if d.is_empty() {
                    return Vec::new();
                }
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for x in &acc {
                    for y in &d {
                        let mut c = x.clone();
                        c.extend(y.iter().cloned());
                        next.push(c);
                    }
                }
                acc = normalize(next);
            }
            acc
        }
        CHead::Or(items) => {
            let mut acc = Vec::new();
            for item in items {
                acc.extend(dnf(item, vals, b));
            }
            normalize(acc)
        }
        CHead::Guard(c, inner) => {
            if c.eval(vals) {
                dnf(inner, vals, b)
            } else {
                vec![Vec::new()]
            }
        }
        CHead::Exists(plan, inner) => {
            let mut acc = Vec::new();
            plan.run(vals, b, &mut |vals| acc.extend(dnf(inner, vals, b)));
            normalize(acc)
        }
    }
}

struct LocalClause {
    binding: Vec<i64>,
    pos: Vec<Key>,
    neg: Vec<Key>,
    head: Dnf,
}

fn ground_clause(
    c: &HornClause,
    pred_ix: &HashMap<&str, usize>,
    b: DomainBound,
) -> Vec<LocalClause> {
    let vars = c.free_vars();
    let n = vars.len();
    let mut comp = Compiler {
        scope: vars.iter().cloned().zip(0..).collect(),
        next_slot: n,
        pred_ix,
    };
    let mut constraints = Vec::new();
    let mut pos_apps = Vec::new();
    let mut neg_apps = Vec::new();
    for l in &c.body {
        match l {
            BodyLit::Constraint(a) => constraints.push(comp.assertion(a)),
            BodyLit::Pos(p) => pos_apps.push((
                pred_ix[p.name.as_str()],
                p.args.iter().map(|v| comp.slot(v).unwrap()).collect::<Vec<_>>(),
            )),
            BodyLit::Neg(p) => neg_apps.push((
                pred_ix[p.name.as_str()],
                p.args.iter().map(|v| comp.slot(v).unwrap()).collect::<Vec<_>>(),
            )),
        }
    }
    let head = comp.head(&c.head);
    let plan = Plan::new((0..n).collect(), constraints);
    let mut vals = vec![0; comp.next_slot];
    let mut out = Vec::new();
    plan.run(&mut vals, b, &mut |vals| {
        let key = |(p, slots): &(usize, Vec<usize>)| (*p, slots.iter().map(|&s| vals[s]).collect::<Vec<i64>>());
        let pos: Vec<Key> = pos_apps.iter().map(key).collect();
        let neg: Vec<Key> = neg_apps.iter().map(key).collect();
        if pos.iter().any(|k| neg.contains(k)) {
            return;
        }
        let binding = vals[..n].to_vec();
        let d = dnf(&head, vals, b);
        if d.iter().any(|conj| conj.iter().all(|k| pos.contains(k))) {
            return;
        }
        out.push(LocalClause {
            binding,
            pos,
            neg,
            head: d,
        });
    });
    out
}

/// Grounds with the ceiling from [`ATOM_CEILING_ENV`] or the default.
pub fn ground(hs: &HornSystem, b: DomainBound) -> Result<GroundSystem, HornError> {
    ground_with_ceiling(hs, b, atom_ceiling())
}

pub fn ground_with_ceiling(
    hs: &HornSystem,
    b: DomainBound,
    ceiling: u128,
) -> Result<GroundSystem, HornError> {
    let mut gs = GroundSystem::empty(b);
    gs.preds = hs.predicates.values().map(|p| (p.name.clone(), p.arity)).collect();
    let potential: u128 = gs
        .preds
        .iter()
        .map(|(_, k)| b.tuple_count(*k).unwrap_or(u128::MAX))
        .fold(0u128, |a, x| a.saturating_add(x));
    if potential > ceiling {
        return Err(HornError::BoundTooLarge {
            atoms: potential,
            ceiling,
        });
    }
    let names = gs.preds.clone();
    let pred_ix: HashMap<&str, usize> =
        names.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    gs.instance_count = hs
        .clauses
        .iter()
        .map(|c| b.tuple_count(c.free_vars().len()).unwrap_or(u128::MAX))
        .fold(0u128, |a, x| a.saturating_add(x));
    let per_clause: Vec<Vec<LocalClause>> = hs
        .clauses
        .par_iter()
        .map(|c| ground_clause(c, &pred_ix, b))
        .collect();
    for (origin, locals) in per_clause.into_iter().enumerate() {
        for lc in locals {
            let pos = lc.pos.into_iter().map(|(p, a)| gs.intern(p, a)).collect();
            let neg = lc.neg.into_iter().map(|(p, a)| gs.intern(p, a)).collect();
            let head = lc
                .head
                .into_iter()
                .map(|d| d.into_iter().map(|(p, a)| gs.intern(p, a)).collect())
                .collect();
            gs.clauses.push(GroundClause {
                origin,
                binding: lc.binding,
                pos,
                neg,
                head,
            });
        }
    }
    let wf: Vec<usize> = hs.wf.iter().map(|w| pred_ix[w.as_str()]).collect();
    gs.build_wf(&wf);
    Ok(gs)
}
