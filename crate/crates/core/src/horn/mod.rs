//! Forall-exists Horn constraints with well-foundedness declarations.
//!
//! A clause `body => head` is implicitly universally quantified over all of
//! its free variables. Heads may contain existential quantifiers, theory
//! constraints, guarded sub-heads and disjunctions; bodies may contain negated
//! predicate applications.

mod emit;
pub mod ground;
mod read;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::logic::{Assertion, Var};
use crate::syntax::ParseError;

pub use emit::{emit_chc, emit_textual, NotExportable};
pub use ground::{ground, GroundAtom, GroundClause, GroundSystem, WfGroup, DEFAULT_ATOM_CEILING};
pub use read::read_textual;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HornError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(String),
    #[error("predicate `{name}` has arity {expected} but is applied to {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("predicate `{0}` declared twice")]
    DuplicatePredicate(String),
    #[error("well-founded predicate `{0}` must have even arity")]
    OddWfArity(String),
    #[error("grounding needs {atoms} atoms, above the ceiling of {ceiling}")]
    BoundTooLarge { atoms: u128, ceiling: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredKind {
    Query,
    WfDeclared,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredicateSymbol {
    pub name: String,
    pub arity: usize,
    pub kind: PredKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredApp {
    pub name: String,
    pub args: Vec<Var>,
}

impl PredApp {
    pub fn new(name: impl Into<String>, args: Vec<Var>) -> Self {
        PredApp {
            name: name.into(),
            args,
        }
    }
}

impl fmt::Display for PredApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyLit {
    Constraint(Assertion),
    Pos(PredApp),
    Neg(PredApp),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HeadFormula {
    Constraint(Assertion),
    App(PredApp),
    And(Vec<HeadFormula>),
    Or(Vec<HeadFormula>),
    /// `c -> h`: the sub-head is required only where `c` holds.
    Guarded(Assertion, Box<HeadFormula>),
    Exists(Vec<Var>, Box<HeadFormula>),
}

fn split_conjuncts(a: Assertion, out: &mut Vec<Assertion>) {
    match a {
        Assertion::And(l, r) => {
            split_conjuncts(*l, out);
            split_conjuncts(*r, out);
        }
        Assertion::True => {}
        other => out.push(other),
    }
}

fn split_disjuncts(a: Assertion, out: &mut Vec<Assertion>) {
    match a {
        Assertion::Or(l, r) => {
            split_disjuncts(*l, out);
            split_disjuncts(*r, out);
        }
        other => out.push(other),
    }
}

/// Top-level conjuncts of `a`, dropping `true`.
pub fn conjuncts(a: &Assertion) -> Vec<Assertion> {
    let mut out = Vec::new();
    split_conjuncts(a.clone(), &mut out);
    out
}

impl HeadFormula {
    /// Canonical conjunction: nested conjunctions are flattened, constraint
    /// conjunctions are split, and an all-constraint list collapses into one
    /// constraint. Emitting and re-reading a canonical head is the identity.
    pub fn conj(items: impl IntoIterator<Item = HeadFormula>) -> HeadFormula {
        let mut flat = Vec::new();
        for h in items {
            match h {
                HeadFormula::And(inner) => flat.extend(inner),
                HeadFormula::Constraint(a) => {
                    flat.extend(conjuncts(&a).into_iter().map(HeadFormula::Constraint))
                }
                other => flat.push(other),
            }
        }
        if flat.iter().all(|h| matches!(h, HeadFormula::Constraint(_))) {
            let parts = flat.into_iter().map(|h| match h {
                HeadFormula::Constraint(a) => a,
                _ => unreachable!(),
            });
            return HeadFormula::Constraint(Assertion::conjoin(parts));
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        HeadFormula::And(flat)
    }

    pub fn disj(items: impl IntoIterator<Item = HeadFormula>) -> HeadFormula {
        let mut flat = Vec::new();
        for h in items {
            match h {
                HeadFormula::Or(inner) => flat.extend(inner),
                HeadFormula::Constraint(a) => {
                    let mut parts = Vec::new();
                    split_disjuncts(a, &mut parts);
                    flat.extend(parts.into_iter().map(HeadFormula::Constraint));
                }
                other => flat.push(other),
            }
        }
        if flat.is_empty() {
            return HeadFormula::Constraint(Assertion::False);
        }
        if flat.iter().all(|h| matches!(h, HeadFormula::Constraint(_))) {
            let mut parts = flat.into_iter().map(|h| match h {
                HeadFormula::Constraint(a) => a,
                _ => unreachable!(),
            });
            let first = parts.next().unwrap();
            return HeadFormula::Constraint(parts.fold(first, Assertion::or));
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        HeadFormula::Or(flat)
    }

    pub fn guarded(c: Assertion, h: HeadFormula) -> HeadFormula {
        match h {
            HeadFormula::Constraint(a) => HeadFormula::Constraint(Assertion::implies(c, a)),
            other => HeadFormula::Guarded(c, Box::new(other)),
        }
    }

    pub fn exists(vars: Vec<Var>, h: HeadFormula) -> HeadFormula {
        if vars.is_empty() {
            return h;
        }
        HeadFormula::Exists(vars, Box::new(h))
    }

    pub fn apps(&self) -> Vec<&PredApp> {
        let mut out = Vec::new();
        self.visit_apps(&mut |a| out.push(a));
        out
    }

    fn visit_apps<'a>(&'a self, f: &mut impl FnMut(&'a PredApp)) {
        match self {
            HeadFormula::Constraint(_) => {}
            HeadFormula::App(a) => f(a),
            HeadFormula::And(hs) | HeadFormula::Or(hs) => hs.iter().for_each(|h| h.visit_apps(f)),
            HeadFormula::Guarded(_, h) | HeadFormula::Exists(_, h) => h.visit_apps(f),
        }
    }

    pub fn has_exists(&self) -> bool {
        match self {
            HeadFormula::Exists(..) => true,
            HeadFormula::Constraint(_) | HeadFormula::App(_) => false,
            HeadFormula::And(hs) | HeadFormula::Or(hs) => hs.iter().any(|h| h.has_exists()),
            HeadFormula::Guarded(_, h) => h.has_exists(),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars_in_order(&self, out: &mut Vec<Var>) {
        self.collect_free(&mut Vec::new(), out);
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        let mut push = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            HeadFormula::Constraint(a) => a.vars_in_order().iter().for_each(|v| push(v, bound)),
            HeadFormula::App(a) => a.args.iter().for_each(|v| push(v, bound)),
            HeadFormula::And(hs) | HeadFormula::Or(hs) => {
                for h in hs {
                    h.collect_free(bound, out);
                }
            }
            HeadFormula::Guarded(c, h) => {
                c.vars_in_order().iter().for_each(|v| push(v, bound));
                h.collect_free(bound, out);
            }
            HeadFormula::Exists(vs, h) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                h.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HornClause {
    pub body: Vec<BodyLit>,
    pub head: HeadFormula,
}

impl HornClause {
    /// Builds a clause, splitting body constraints into conjuncts and dropping `true`.
    pub fn new(body: impl IntoIterator<Item = BodyLit>, head: HeadFormula) -> Self {
        let mut lits = Vec::new();
        for l in body {
            match l {
                BodyLit::Constraint(a) => {
                    lits.extend(conjuncts(&a).into_iter().map(BodyLit::Constraint))
                }
                other => lits.push(other),
            }
        }
        HornClause { body: lits, head }
    }

    /// Universally quantified variables in first-occurrence order (body, then head).
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for l in &self.body {
            let vs = match l {
                BodyLit::Constraint(a) => a.vars_in_order(),
                BodyLit::Pos(p) | BodyLit::Neg(p) => p.args.clone(),
            };
            for v in vs {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        self.head.free_vars_in_order(&mut out);
        out
    }

    pub fn apps(&self) -> Vec<&PredApp> {
        let mut out: Vec<&PredApp> = self
            .body
            .iter()
            .filter_map(|l| match l {
                BodyLit::Pos(p) | BodyLit::Neg(p) => Some(p),
                BodyLit::Constraint(_) => None,
            })
            .collect();
        out.extend(self.head.apps());
        out
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        emit::fmt_clause(self, f)
    }
}

/// Predicates, clauses in emission order, and well-foundedness declarations.
#[derive(Debug, Clone, Default)]
pub struct HornSystem {
    pub predicates: BTreeMap<String, PredicateSymbol>,
    pub clauses: Vec<HornClause>,
    /// Well-founded predicates in declaration order.
    pub wf: Vec<String>,
    counters: BTreeMap<String, usize>,
}

impl PartialEq for HornSystem {
    fn eq(&self, other: &Self) -> bool {
        self.predicates == other.predicates && self.clauses == other.clauses && self.wf == other.wf
    }
}

impl Eq for HornSystem {}

impl HornSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `prefix_k` for the smallest unused `k` in this prefix's sequence.
    pub fn fresh_pred(&mut self, prefix: &str, arity: usize) -> PredicateSymbol {
        let counter = self.counters.entry(prefix.to_string()).or_insert(0);
        loop {
            let name = format!("{prefix}_{counter}");
            *counter += 1;
            if let std::collections::btree_map::Entry::Vacant(slot) = self.predicates.entry(name.clone()) {
                let sym = PredicateSymbol {
                    name,
                    arity,
                    kind: PredKind::Query,
                };
                slot.insert(sym.clone());
                return sym;
            }
        }
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), HornError> {
        if self.predicates.contains_key(name) {
            return Err(HornError::DuplicatePredicate(name.to_string()));
        }
        self.predicates.insert(
            name.to_string(),
            PredicateSymbol {
                name: name.to_string(),
                arity,
                kind: PredKind::Query,
            },
        );
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.predicates.get(name).map(|p| p.arity)
    }

    pub fn add_clause(&mut self, clause: HornClause) -> Result<(), HornError> {
        for app in clause.apps() {
            self.check_app(app)?;
        }
        self.clauses.push(clause);
        Ok(())
    }

    fn check_app(&self, app: &PredApp) -> Result<(), HornError> {
        let p = self
            .predicates
            .get(&app.name)
            .ok_or_else(|| HornError::UndeclaredPredicate(app.name.clone()))?;
        if p.arity != app.args.len() {
            return Err(HornError::ArityMismatch {
                name: app.name.clone(),
                expected: p.arity,
                found: app.args.len(),
            });
        }
        Ok(())
    }

    pub fn add_wf(&mut self, name: &str) -> Result<(), HornError> {
        let p = self
            .predicates
            .get_mut(name)
            .ok_or_else(|| HornError::UndeclaredPredicate(name.to_string()))?;
        if p.arity % 2 != 0 {
            return Err(HornError::OddWfArity(name.to_string()));
        }
        p.kind = PredKind::WfDeclared;
        if !self.wf.iter().any(|w| w == name) {
            self.wf.push(name.to_string());
        }
        Ok(())
    }

    pub fn is_wf(&self, name: &str) -> bool {
        self.wf.iter().any(|w| w == name)
    }

    /// Names of predicates referenced by some clause or wf declaration.
    pub fn used_predicates(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.wf.iter().cloned().collect();
        for c in &self.clauses {
            out.extend(c.apps().into_iter().map(|a| a.name.clone()));
        }
        out
    }

    pub fn has_existential_heads(&self) -> bool {
        self.clauses.iter().any(|c| c.head.has_exists())
    }
}

impl fmt::Display for HornSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_textual(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_assertion;

    #[test]
    fn fresh_names_are_sequential_per_prefix() {
        let mut hs = HornSystem::new();
        assert_eq!(hs.fresh_pred("aux", 2).name, "aux_0");
        assert_eq!(hs.fresh_pred("aux", 2).name, "aux_1");
        let r = hs.fresh_pred("rank", 4);
        assert_eq!((r.name.as_str(), r.arity), ("rank_0", 4));
    }

    #[test]
    fn fresh_skips_taken_names() {
        let mut hs = HornSystem::new();
        hs.declare("inv_0", 1).unwrap();
        assert_eq!(hs.fresh_pred("inv", 1).name, "inv_1");
    }

    #[test]
    fn clause_validation() {
        let mut hs = HornSystem::new();
        hs.declare("p", 1).unwrap();
        let bad = HornClause::new([], HeadFormula::App(PredApp::new("p", vec![])));
        assert!(matches!(hs.add_clause(bad), Err(HornError::ArityMismatch { .. })));
        let undeclared = HornClause::new([], HeadFormula::App(PredApp::new("q", vec![])));
        assert!(matches!(hs.add_clause(undeclared), Err(HornError::UndeclaredPredicate(_))));
        assert!(matches!(hs.add_wf("p"), Err(HornError::OddWfArity(_))));
    }

    #[test]
    fn canonical_heads() {
        let c = |s: &str| HeadFormula::Constraint(parse_assertion(s).unwrap());
        assert_eq!(HeadFormula::conj([c("x = 1"), c("y = 2")]), c("x = 1 && y = 2"));
        let p = HeadFormula::App(PredApp::new("p", vec![Var::new("x")]));
        assert_eq!(
            HeadFormula::conj([c("x = 1 && y = 2"), p.clone()]),
            HeadFormula::And(vec![c("x = 1"), c("y = 2"), p.clone()])
        );
        assert_eq!(HeadFormula::conj([p.clone()]), p);
        assert_eq!(HeadFormula::disj([c("x = 1"), c("y = 2")]), c("x = 1 || y = 2"));
        assert_eq!(HeadFormula::guarded(parse_assertion("x = 0").unwrap(), c("y = 1")), c("x = 0 -> y = 1"));
    }

    #[test]
    fn clause_free_vars_respect_head_binders() {
        let body = vec![BodyLit::Pos(PredApp::new("inv", vec![Var::new("v")]))];
        let head = HeadFormula::exists(
            vec![Var::primed("v")],
            HeadFormula::conj([
                HeadFormula::Constraint(parse_assertion("v' = v + 1").unwrap()),
                HeadFormula::App(PredApp::new("inv", vec![Var::primed("v")])),
            ]),
        );
        assert_eq!(HornClause::new(body, head).free_vars(), vec![Var::new("v")]);
    }
}
