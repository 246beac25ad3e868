//! Template-driven Skolemization with counterexample-guided refinement.
//!
//! Every existentially quantified head variable is replaced by a witness
//! function drawn from a parameterized template. For a fixed parameter point
//! the system has no existential heads left and is decided by the ground
//! solver. An unsatisfiable point yields a core of ground clauses; the points
//! that reproduce the same Skolem instances in that core are refuted by the
//! same derivation and are blocked together. Points are tried in
//! lexicographic order, so the first admissible one is returned.

mod template;

use std::collections::HashSet;

use thiserror::Error;

use crate::horn::{ground, BodyLit, HeadFormula, HornClause, HornError, HornSystem, PredApp};
use crate::logic::{Assertion, Var};
use crate::solver::{check_solution, solve_ground_with_core, Budget, Outcome, Solution};
use crate::system::DomainBound;

pub use template::{parse_templates, Shape, SkolemTemplate, Slot, TemplateError, TemplateRule};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CegarError {
    #[error("no template for `{target}` in clause {clause}")]
    MissingTemplate { clause: usize, target: String },
    #[error("template for `{target}` in clause {clause} uses `{var}`, which is not a universal variable of the clause")]
    TemplateVariable { clause: usize, target: String, var: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Horn(#[from] HornError),
}

/// One existential variable of one clause, with its witness template.
#[derive(Debug, Clone)]
pub struct SkolemSlot {
    /// Index into the original clauses.
    pub clause: usize,
    /// The variable as bound in the original head.
    pub target: String,
    /// Fresh universal variable standing for the witness.
    pub var: Var,
    pub template: SkolemTemplate,
    /// Position of this template's parameters in a parameter point.
    pub offset: usize,
}

#[derive(Debug, Clone)]
enum Prepared {
    Plain(HornClause),
    Skolem {
        body: Vec<BodyLit>,
        head: HeadFormula,
        slots: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy)]
enum Role {
    Plain,
    Main,
    Guard(usize),
}

/// A system prepared for Skolemization.
#[derive(Debug, Clone)]
pub struct Skolemizer {
    base: HornSystem,
    prepared: Vec<Prepared>,
    pub slots: Vec<SkolemSlot>,
    /// Inclusive range of every parameter, in point order.
    pub params: Vec<(i64, i64)>,
}

fn rename_head(h: &HeadFormula, from: &Var, to: &Var) -> HeadFormula {
    let rv = |v: &Var| if v == from { to.clone() } else { v.clone() };
    let ra = |a: &Assertion| a.rename(&rv);
    let rp = |p: &PredApp| PredApp::new(p.name.clone(), p.args.iter().map(rv).collect());
    match h {
        HeadFormula::Constraint(a) => HeadFormula::Constraint(ra(a)),
        HeadFormula::App(p) => HeadFormula::App(rp(p)),
        HeadFormula::And(xs) => HeadFormula::And(xs.iter().map(|x| rename_head(x, from, to)).collect()),
        HeadFormula::Or(xs) => HeadFormula::Or(xs.iter().map(|x| rename_head(x, from, to)).collect()),
        HeadFormula::Guarded(c, x) => HeadFormula::Guarded(ra(c), Box::new(rename_head(x, from, to))),
        HeadFormula::Exists(vs, _) if vs.contains(from) => h.clone(),
        HeadFormula::Exists(vs, x) => HeadFormula::Exists(vs.clone(), Box::new(rename_head(x, from, to))),
    }
}

/// Removes every existential binder, renaming bound variables apart.
/// Returns the rewritten head and `(original, fresh)` pairs in binder order.
fn hoist(h: &HeadFormula, taken: &mut HashSet<String>, out: &mut Vec<(Var, Var)>) -> HeadFormula {
    match h {
        HeadFormula::Exists(vs, inner) => {
            let mut body = (**inner).clone();
            for v in vs {
                let mut k = 0;
                let fresh = loop {
                    let name = format!("{}_sk{k}", v.name);
                    if taken.insert(name.clone()) {
                        break Var::new(name);
                    }
                    k += 1;
                };
                body = rename_head(&body, v, &fresh);
                out.push((v.clone(), fresh));
            }
            hoist(&body, taken, out)
        }
        HeadFormula::And(xs) => HeadFormula::conj(xs.iter().map(|x| hoist(x, taken, out)).collect::<Vec<_>>()),
        HeadFormula::Or(xs) => HeadFormula::disj(xs.iter().map(|x| hoist(x, taken, out)).collect::<Vec<_>>()),
        HeadFormula::Guarded(c, x) => HeadFormula::guarded(c.clone(), hoist(x, taken, out)),
        other => other.clone(),
    }
}

fn pick_template(rules: &[TemplateRule], clause: usize, target: &str) -> Option<SkolemTemplate> {
    let matching = |r: &&TemplateRule| r.template.target == target;
    rules
        .iter()
        .filter(matching)
        .find(|r| r.clause == Some(clause + 1))
        .or_else(|| rules.iter().filter(matching).find(|r| r.clause.is_none()))
        .map(|r| r.template.clone())
}

impl Skolemizer {
    /// Assigns a template to every existential variable: a matching rule for
    /// that clause, else a matching rule without clause number, else (when
    /// `defaults` is set) the default family over the clause's universal variables.
    pub fn new(hs: &HornSystem, rules: &[TemplateRule], defaults: bool) -> Result<Self, CegarError> {
        let mut prepared = Vec::new();
        let mut slots = Vec::new();
        let mut params = Vec::new();
        for (ci, c) in hs.clauses.iter().enumerate() {
            if !c.head.has_exists() {
                prepared.push(Prepared::Plain(c.clone()));
                continue;
            }
            let universal = c.free_vars();
            let mut taken: HashSet<String> = universal.iter().map(|v| v.name.clone()).collect();
            let mut bound = Vec::new();
            let head = hoist(&c.head, &mut taken, &mut bound);
            let mut ids = Vec::new();
            for (orig, fresh) in bound {
                let target = orig.to_string();
                let template = match pick_template(rules, ci, &target) {
                    Some(t) => t,
                    None if defaults => SkolemTemplate::default_family(&target, universal.clone()),
                    None => return Err(CegarError::MissingTemplate { clause: ci + 1, target }),
                };
                if let Some(v) = template.vars().into_iter().find(|v| !universal.contains(v)) {
                    return Err(CegarError::TemplateVariable {
                        clause: ci + 1,
                        target,
                        var: v.to_string(),
                    });
                }
                ids.push(slots.len());
                let ps = template.params();
                slots.push(SkolemSlot {
                    clause: ci,
                    target,
                    var: fresh,
                    template,
                    offset: params.len(),
                });
                params.extend(ps);
            }
            prepared.push(Prepared::Skolem {
                body: c.body.clone(),
                head,
                slots: ids,
            });
        }
        let mut base = HornSystem::new();
        for p in hs.predicates.values() {
            base.declare(&p.name, p.arity)?;
        }
        for w in &hs.wf {
            base.add_wf(w)?;
        }
        Ok(Skolemizer {
            base,
            prepared,
            slots,
            params,
        })
    }

    fn slot_params<'p>(&self, slot: usize, point: &'p [i64]) -> &'p [i64] {
        let s = &self.slots[slot];
        &point[s.offset..s.offset + s.template.params().len()]
    }

    /// Witness functions at `point`, e.g. `clause 1: y = x - 1`.
    pub fn describe(&self, point: &[i64]) -> Vec<String> {
        (0..self.slots.len())
            .map(|i| {
                let s = &self.slots[i];
                format!("clause {}: {}", s.clause + 1, s.template.describe(self.slot_params(i, point)))
            })
            .collect()
    }

    fn instantiate_roles(&self, point: &[i64], b: DomainBound) -> Result<(HornSystem, Vec<Role>), CegarError> {
        let mut hs = self.base.clone();
        let mut roles = Vec::new();
        for p in &self.prepared {
            match p {
                Prepared::Plain(c) => {
                    hs.add_clause(c.clone())?;
                    roles.push(Role::Plain);
                }
                Prepared::Skolem { body, head, slots } => {
                    let mut main_body = body.clone();
                    let mut guards = Vec::new();
                    for &i in slots {
                        let s = &self.slots[i];
                        let (eq, out) = s.template.instantiate(self.slot_params(i, point), &s.var, b.lo, b.hi);
                        main_body.push(BodyLit::Constraint(eq));
                        if out != Assertion::False {
                            let mut gb = body.clone();
                            gb.push(BodyLit::Constraint(out));
                            guards.push((i, gb));
                        }
                    }
                    hs.add_clause(HornClause::new(main_body, head.clone()))?;
                    roles.push(Role::Main);
                    for (i, gb) in guards {
                        hs.add_clause(HornClause::new(gb, HeadFormula::Constraint(Assertion::False)))?;
                        roles.push(Role::Guard(i));
                    }
                }
            }
        }
        Ok((hs, roles))
    }

    /// The system at a fixed parameter point: each existential becomes a
    /// premise equation with its witness term, and each witness that can
    /// leave the box gets a clause forbidding that.
    pub fn instantiate(&self, point: &[i64], b: DomainBound) -> Result<HornSystem, CegarError> {
        Ok(self.instantiate_roles(point, b)?.0)
    }

    pub fn point_count(&self) -> u128 {
        self.params
            .iter()
            .map(|(lo, hi)| (hi - lo + 1) as u128)
            .fold(1u128, |a, x| a.saturating_mul(x))
    }
}

/// Convenience wrapper: Skolemize with the given rules (no defaults) at `point`.
pub fn skolemize(
    hs: &HornSystem,
    rules: &[TemplateRule],
    point: &[i64],
    b: DomainBound,
) -> Result<HornSystem, CegarError> {
    Skolemizer::new(hs, rules, false)?.instantiate(point, b)
}

/// The value a witness takes (or that it leaves the box) at one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Expect {
    Equals(i64),
    OutOfBox,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Condition {
    slot: usize,
    args: Vec<i64>,
    expect: Expect,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefineOutcome {
    Solved {
        point: Vec<i64>,
        witnesses: Vec<String>,
        solution: Solution,
    },
    /// No parameter point survives. With `full_cover` the final refutation
    /// did not depend on any witness choice, so the system itself is
    /// unsatisfiable at this bound.
    Exhausted { full_cover: bool },
    Unknown(String),
}

#[derive(Debug, Clone)]
pub struct RefineReport {
    pub outcome: RefineOutcome,
    /// Number of refuted parameter points.
    pub iterations: usize,
    pub log: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RefineBudget {
    pub solver: Budget,
    pub max_iterations: Option<usize>,
}

struct Odometer {
    ranges: Vec<(i64, i64)>,
    cur: Option<Vec<i64>>,
}

impl Odometer {
    fn new(ranges: Vec<(i64, i64)>) -> Self {
        let cur = Some(ranges.iter().map(|r| r.0).collect());
        Odometer { ranges, cur }
    }

    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.cur.clone()?;
        let mut p = out.clone();
        let mut i = p.len();
        self.cur = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            if p[i] < self.ranges[i].1 {
                p[i] += 1;
                break Some(p);
            }
            p[i] = self.ranges[i].0;
        };
        Some(out)
    }
}

pub fn refine_loop(
    hs: &HornSystem,
    rules: &[TemplateRule],
    defaults: bool,
    b: DomainBound,
    budget: RefineBudget,
) -> Result<RefineReport, CegarError> {
    let sk = Skolemizer::new(hs, rules, defaults)?;
    let mut log = Vec::new();
    log.push(format!(
        "templates: {} witness slot(s), {} parameter point(s)",
        sk.slots.len(),
        sk.point_count()
    ));
    for s in &sk.slots {
        log.push(format!("  clause {}: {}", s.clause + 1, s.template));
    }
    let mut refinements: Vec<Vec<Condition>> = Vec::new();
    let mut points = Odometer::new(sk.params.clone());
    let blocked = |p: &[i64], refinements: &[Vec<Condition>]| {
        refinements.iter().any(|r| {
            r.iter().all(|c| {
                let w = sk.slots[c.slot].template.eval(sk.slot_params(c.slot, p), &c.args);
                match c.expect {
                    Expect::Equals(y) => w == y,
                    Expect::OutOfBox => !b.contains(w),
                }
            })
        })
    };
    let report = |outcome, log, iterations| RefineReport {
        outcome,
        iterations,
        log,
    };
    while let Some(point) = points.next() {
        if blocked(&point, &refinements) {
            continue;
        }
        if let Some(max) = budget.max_iterations {
            if refinements.len() >= max {
                return Ok(report(RefineOutcome::Unknown("iteration budget exhausted".into()), log, refinements.len()));
            }
        }
        if let Some(d) = budget.solver.deadline {
            if std::time::Instant::now() >= d {
                return Ok(report(RefineOutcome::Unknown("timeout".into()), log, refinements.len()));
            }
        }
        let (inst, roles) = sk.instantiate_roles(&point, b)?;
        let gs = ground(&inst, b)?;
        let run = solve_ground_with_core(&gs, budget.solver);
        let described = sk.describe(&point).join("; ");
        let candidate = if described.is_empty() { "no witnesses".to_string() } else { described };
        match run.outcome {
            Outcome::Sat(solution) => {
                if !check_solution(&gs, &solution) {
                    return Ok(report(
                        RefineOutcome::Unknown("solver certificate rejected".into()),
                        log,
                        refinements.len(),
                    ));
                }
                log.push(format!("iteration {}: {candidate} -> sat", refinements.len() + 1));
                let witnesses = sk.describe(&point);
                return Ok(report(
                    RefineOutcome::Solved {
                        point,
                        witnesses,
                        solution,
                    },
                    log,
                    refinements.len(),
                ));
            }
            Outcome::Unknown(why) => {
                log.push(format!("iteration {}: {candidate} -> unknown ({why})", refinements.len() + 1));
                return Ok(report(RefineOutcome::Unknown(why), log, refinements.len()));
            }
            Outcome::Unsat => {
                let core = run.core.expect("core requested");
                let mut conds: Vec<Condition> = Vec::new();
                for &gi in &core {
                    let gc = &gs.clauses[gi];
                    let clause = &inst.clauses[gc.origin];
                    let vars = clause.free_vars();
                    let value = |v: &Var| gc.binding[vars.iter().position(|w| w == v).expect("clause variable")];
                    let args_of = |slot: usize| -> Vec<i64> { sk.slots[slot].template.vars().iter().map(value).collect() };
                    let new: Vec<Condition> = match roles[gc.origin] {
                        Role::Plain => continue,
                        Role::Main => {
                            let Prepared::Skolem { slots, .. } = &sk.prepared[sk.slots_clause_index(gc.origin, &roles)] else {
                                unreachable!()
                            };
                            slots
                                .iter()
                                .map(|&s| Condition {
                                    slot: s,
                                    args: args_of(s),
                                    expect: Expect::Equals(value(&sk.slots[s].var)),
                                })
                                .collect()
                        }
                        Role::Guard(s) => vec![Condition {
                            slot: s,
                            args: args_of(s),
                            expect: Expect::OutOfBox,
                        }],
                    };
                    for c in new {
                        if !conds.contains(&c) {
                            conds.push(c);
                        }
                    }
                }
                let full = conds.is_empty();
                log.push(format!(
                    "iteration {}: {candidate} -> unsat, core of {} ground clause(s), {} witness condition(s)",
                    refinements.len() + 1,
                    core.len(),
                    conds.len()
                ));
                refinements.push(conds);
                if full {
                    return Ok(report(RefineOutcome::Exhausted { full_cover: true }, log, refinements.len()));
                }
            }
        }
    }
    log.push("all parameter points refuted".into());
    let n = refinements.len();
    Ok(report(RefineOutcome::Exhausted { full_cover: false }, log, n))
}

impl Skolemizer {
    /// Maps an instantiated clause index (with its roles) back to the prepared clause.
    fn slots_clause_index(&self, inst_index: usize, roles: &[Role]) -> usize {
        roles[..=inst_index]
            .iter()
            .filter(|r| !matches!(r, Role::Guard(_)))
            .count()
            - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::{emit_textual, read_textual};

    const RUNNING: &str = "x >= 0 => exists y. x >= y && rank(x, y)\nwf(rank)\n";

    fn b(lo: i64, hi: i64) -> DomainBound {
        DomainBound::new(lo, hi).unwrap()
    }

    #[test]
    fn skolemizes_running_example() {
        let hs = read_textual(RUNNING).unwrap();
        let rules = parse_templates("y: x + [-2..2]").unwrap();
        let out = skolemize(&hs, &rules, &[-1], b(-1, 3)).unwrap();
        assert_eq!(
            emit_textual(&out),
            "x >= 0 && y_sk0 = x - 1 => x >= y_sk0 && rank(x, y_sk0)\n\
             x >= 0 && (x - 1 < -1 || x - 1 > 3) => false\n\
             wf(rank)\n"
        );
        assert!(!out.has_existential_heads());
    }

    #[test]
    fn no_existentials_is_unchanged() {
        let hs = read_textual("x = 0 => p(x)\np(x) => x < 5\n").unwrap();
        assert_eq!(skolemize(&hs, &[], &[], b(0, 1)).unwrap(), hs);
        let rep = refine_loop(&hs, &[], true, b(0, 1), RefineBudget::default()).unwrap();
        assert!(matches!(rep.outcome, RefineOutcome::Solved { .. }));
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn missing_template_is_reported() {
        let hs = read_textual(RUNNING).unwrap();
        assert_eq!(
            Skolemizer::new(&hs, &[], false).unwrap_err(),
            CegarError::MissingTemplate {
                clause: 1,
                target: "y".into()
            }
        );
    }

    #[test]
    fn running_example_finds_predecessor_witness() {
        let hs = read_textual(RUNNING).unwrap();
        let rep = refine_loop(&hs, &[], true, b(-1, 3), RefineBudget::default()).unwrap();
        match &rep.outcome {
            RefineOutcome::Solved { point, witnesses, .. } => {
                assert_eq!(point, &vec![0, -1]);
                assert_eq!(witnesses, &vec!["clause 1: y = x - 1".to_string()]);
            }
            other => panic!("{other:?}\n{}", rep.log.join("\n")),
        }
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn unsatisfiable_family_is_exhausted() {
        let hs = read_textual(RUNNING).unwrap();
        let rules = parse_templates("y: x + [0..1]").unwrap();
        let rep = refine_loop(&hs, &rules, false, b(-1, 3), RefineBudget::default()).unwrap();
        assert_eq!(rep.outcome, RefineOutcome::Exhausted { full_cover: false });
        assert!(rep.iterations <= 2);
    }

    #[test]
    fn template_independent_refutation_covers_everything() {
        // No witness can help: the premise itself is contradictory.
        let hs = read_textual("x = 0 => exists y. p(x, y)\np(x, y) => false\n").unwrap();
        let rep = refine_loop(&hs, &[], true, b(0, 1), RefineBudget::default()).unwrap();
        assert!(matches!(rep.outcome, RefineOutcome::Exhausted { .. }));
        let hs = read_textual("x = 0 => false\ntrue => exists y. y = x\n").unwrap();
        let rep = refine_loop(&hs, &[], true, b(0, 1), RefineBudget::default()).unwrap();
        assert_eq!(rep.outcome, RefineOutcome::Exhausted { full_cover: true });
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn nested_existentials_are_hoisted() {
        let hs = read_textual("inv(v) && !(v = 2) => v >= 0 && (exists v'. v' = v + 1)\ntrue => inv(v)\n").unwrap();
        let sk = Skolemizer::new(&hs, &[], true).unwrap();
        assert_eq!(sk.slots.len(), 1);
        assert_eq!(sk.slots[0].target, "v'");
        let out = sk.instantiate(&[0, 1], b(0, 2)).unwrap();
        assert_eq!(
            emit_textual(&out).lines().next().unwrap(),
            "inv(v) && !(v = 2) && v_sk0 = v + 1 => v >= 0 && v_sk0 = v + 1"
        );
    }
}
