//! Constraint generation: a single top-down pass over a formula that emits
//! Horn clauses with well-foundedness declarations. The resulting system is
//! satisfiable exactly when the transition system satisfies the formula.
//!
//! Each activation receives the current variable scope, a premise describing
//! the states it is responsible for (the system's initial condition or an
//! auxiliary predicate), and the transition relation extended with frame
//! equalities for the first-order variables in scope. Theory atoms below a
//! connective or temporal operator are used in place rather than through a
//! fresh auxiliary predicate.

use thiserror::Error;

use crate::formula::{Formula, PathFormula};
use crate::horn::{conjuncts, BodyLit, HeadFormula, HornClause, HornError, HornSystem, PredApp};
use crate::logic::{Assertion, Term, Var};
use crate::system::TransitionSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error(transparent)]
    Horn(#[from] HornError),
}

/// One activation of the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub formula: String,
    pub scope: Vec<String>,
    pub init: String,
    pub next: String,
}

impl std::fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "gen({}; ({}); {}; {})",
            self.formula,
            self.scope.join(", "),
            self.init,
            self.next
        )
    }
}

/// Inputs of one activation.
#[derive(Debug, Clone)]
pub struct GenContext {
    pub scope: Vec<Var>,
    pub init: Vec<BodyLit>,
    pub next: Assertion,
}

impl GenContext {
    pub fn for_system(ts: &TransitionSystem) -> Self {
        GenContext {
            scope: ts.vars.iter().map(Var::new).collect(),
            init: vec![BodyLit::Constraint(ts.init.clone())],
            next: ts.next.clone(),
        }
    }

    fn primed(&self) -> Vec<Var> {
        self.scope.iter().map(Var::prime).collect()
    }

    fn primed_apply(&self, p: &PredApp) -> PredApp {
        PredApp::new(p.name.clone(), p.args.iter().map(Var::prime).collect())
    }

    fn app(&self, name: &str) -> PredApp {
        PredApp::new(name, self.scope.clone())
    }

    fn rank(&self, name: &str) -> PredApp {
        let mut args = self.scope.clone();
        args.extend(self.primed());
        PredApp::new(name, args)
    }

    fn next_head(&self) -> Vec<HeadFormula> {
        conjuncts(&self.next).into_iter().map(HeadFormula::Constraint).collect()
    }

    fn with_init(&self, init: Vec<BodyLit>) -> GenContext {
        GenContext {
            scope: self.scope.clone(),
            init,
            next: self.next.clone(),
        }
    }
}

pub fn gen(ts: &TransitionSystem, f: &Formula) -> Result<HornSystem, GenError> {
    Ok(gen_trace(ts, f)?.0)
}

pub fn gen_trace(ts: &TransitionSystem, f: &Formula) -> Result<(HornSystem, Vec<TraceEntry>), GenError> {
    let mut g = Gen {
        hs: HornSystem::new(),
        trace: Vec::new(),
    };
    g.run(f, &GenContext::for_system(ts))?;
    Ok((g.hs, g.trace))
}

/// Runs the generator from an arbitrary context into an existing system.
pub fn gen_into(hs: &mut HornSystem, f: &Formula, ctx: &GenContext) -> Result<Vec<TraceEntry>, GenError> {
    let mut g = Gen {
        hs: std::mem::take(hs),
        trace: Vec::new(),
    };
    let res = g.run(f, ctx);
    *hs = g.hs;
    res.map(|_| g.trace)
}

fn body_text(body: &[BodyLit]) -> String {
    if body.is_empty() {
        return "true".into();
    }
    let parts: Vec<String> = body
        .iter()
        .map(|l| match l {
            BodyLit::Constraint(a) if body.len() > 1 && a.is_compound() => format!("({a})"),
            BodyLit::Constraint(a) => a.to_string(),
            BodyLit::Pos(p) => p.to_string(),
            BodyLit::Neg(p) => format!("!{p}"),
        })
        .collect();
    parts.join(" && ")
}

/// A child subformula either used in place (theory atom) or delegated to a
/// fresh predicate that a later activation defines.
enum Child<'f> {
    Atom(Assertion),
    Pred(PredApp, &'f Formula),
}

impl Child<'_> {
    fn as_head(&self) -> HeadFormula {
        match self {
            Child::Atom(a) => HeadFormula::Constraint(a.clone()),
            Child::Pred(p, _) => HeadFormula::App(p.clone()),
        }
    }

    /// Premise literal for "this child does not hold".
    fn negated(&self) -> BodyLit {
        match self {
            Child::Atom(a) => BodyLit::Constraint(Assertion::not(a.clone())),
            Child::Pred(p, _) => BodyLit::Neg(p.clone()),
        }
    }

    /// Head for "this child holds in the primed state".
    fn primed_head(&self, ctx: &GenContext) -> HeadFormula {
        match self {
            Child::Atom(a) => HeadFormula::Constraint(a.prime_vars(&ctx.scope)),
            Child::Pred(p, _) => HeadFormula::App(ctx.primed_apply(p)),
        }
    }
}

struct Gen {
    hs: HornSystem,
    trace: Vec<TraceEntry>,
}

impl Gen {
    fn record(&mut self, formula: String, ctx: &GenContext) {
        self.trace.push(TraceEntry {
            formula,
            scope: ctx.scope.iter().map(|v| v.to_string()).collect(),
            init: body_text(&ctx.init),
            next: ctx.next.to_string(),
        });
    }

    fn emit(&mut self, body: Vec<BodyLit>, head: HeadFormula) -> Result<(), GenError> {
        self.hs.add_clause(HornClause::new(body, head))?;
        Ok(())
    }

    fn fresh(&mut self, prefix: &str, arity: usize) -> String {
        self.hs.fresh_pred(prefix, arity).name
    }

    fn child<'f>(&mut self, f: &'f Formula, scope: &[Var]) -> Child<'f> {
        match f {
            Formula::Atom(a) => Child::Atom(a.clone()),
            _ => {
                let name = self.fresh("aux", scope.len());
                Child::Pred(PredApp::new(name, scope.to_vec()), f)
            }
        }
    }

    fn descend(&mut self, c: Child<'_>, ctx: &GenContext) -> Result<(), GenError> {
        if let Child::Pred(p, f) = c {
            self.run(f, &ctx.with_init(vec![BodyLit::Pos(p)]))?;
        }
        Ok(())
    }

    fn run(&mut self, f: &Formula, ctx: &GenContext) -> Result<(), GenError> {
        self.record(f.to_string(), ctx);
        match f {
            Formula::Forall(x, g) => {
                let x = Var::new(x.clone());
                let mut scope = ctx.scope.clone();
                scope.push(x.clone());
                let inner = GenContext {
                    scope,
                    init: ctx.init.clone(),
                    next: frame(&ctx.next, &x),
                };
                self.run(g, &inner)
            }
            Formula::Exists(x, g) => {
                let x = Var::new(x.clone());
                let mut scope = ctx.scope.clone();
                scope.push(x.clone());
                let inner = GenContext {
                    scope: scope.clone(),
                    init: ctx.init.clone(),
                    next: frame(&ctx.next, &x),
                };
                let c = self.child(g, &scope);
                self.emit(ctx.init.clone(), HeadFormula::exists(vec![x], c.as_head()))?;
                self.descend(c, &inner.with_init(ctx.init.clone()))
            }
            Formula::Atom(a) => self.emit(ctx.init.clone(), HeadFormula::Constraint(a.clone())),
            Formula::Implies(c, g) => {
                if let Formula::Atom(a) = &**g {
                    return self.emit(
                        ctx.init.clone(),
                        HeadFormula::Constraint(Assertion::implies(c.clone(), a.clone())),
                    );
                }
                let name = self.fresh("aux", ctx.scope.len());
                let aux = ctx.app(&name);
                // The guarded head is itself an activation with the delegated
                // subformula already replaced by its predicate.
                self.record(format!("{} -> {aux}", fmt_guard(c)), ctx);
                self.emit(
                    ctx.init.clone(),
                    HeadFormula::guarded(c.clone(), HeadFormula::App(aux.clone())),
                )?;
                self.run(g, &ctx.with_init(vec![BodyLit::Pos(aux)]))
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let ca = self.child(a, &ctx.scope);
                let cb = self.child(b, &ctx.scope);
                let items = [ca.as_head(), cb.as_head()];
                let head = if matches!(f, Formula::And(..)) {
                    HeadFormula::conj(items)
                } else {
                    HeadFormula::disj(items)
                };
                self.emit(ctx.init.clone(), head)?;
                self.descend(ca, ctx)?;
                self.descend(cb, ctx)
            }
            Formula::Not(_) => Err(GenError::UnsupportedConstruct(format!(
                "negation above a theory atom in `{f}`; normalize the formula first"
            ))),
            Formula::A(p) => self.path(true, p, ctx),
            Formula::E(p) => self.path(false, p, ctx),
        }
    }

    fn path(&mut self, universal: bool, p: &PathFormula, ctx: &GenContext) -> Result<(), GenError> {
        let primed = ctx.primed();
        match p {
            PathFormula::Next(g) => {
                let c = self.child(g, &ctx.scope);
                if universal {
                    self.emit(
                        ctx.init.clone(),
                        HeadFormula::exists(primed, HeadFormula::conj(ctx.next_head())),
                    )?;
                    let mut body = ctx.init.clone();
                    body.push(BodyLit::Constraint(ctx.next.clone()));
                    self.emit(body, c.primed_head(ctx))?;
                } else {
                    let mut items = ctx.next_head();
                    items.push(c.primed_head(ctx));
                    self.emit(ctx.init.clone(), HeadFormula::exists(primed, HeadFormula::conj(items)))?;
                }
                self.descend(c, ctx)
            }
            PathFormula::Globally(g) => {
                let inv = ctx.app(&self.fresh("inv", ctx.scope.len()));
                let inv_next = ctx.primed_apply(&inv);
                self.emit(ctx.init.clone(), HeadFormula::App(inv.clone()))?;
                let body = vec![BodyLit::Pos(inv.clone()), BodyLit::Constraint(ctx.next.clone())];
                if universal {
                    self.emit(body, HeadFormula::App(inv_next))?;
                } else {
                    // The successor in the premise only asserts that one
                    // exists; the head picks its own, which must stay in inv.
                    let mut items = ctx.next_head();
                    items.push(HeadFormula::App(inv_next));
                    self.emit(body, HeadFormula::exists(primed, HeadFormula::conj(items)))?;
                }
                self.run(g, &ctx.with_init(vec![BodyLit::Pos(inv)]))
            }
            PathFormula::Finally(g) => self.until(universal, &Formula::Atom(Assertion::True), g, ctx),
            PathFormula::Until(a, b) => self.until(universal, a, b, ctx),
            PathFormula::WeakUntil(a, b) => self.weak_until(universal, a, b, ctx),
        }
    }

    /// Like the until rule without the ranking obligation: the invariant may
    /// persist forever while the goal is pending.
    fn weak_until(&mut self, universal: bool, hold: &Formula, goal: &Formula, ctx: &GenContext) -> Result<(), GenError> {
        let inv = ctx.app(&self.fresh("inv", ctx.scope.len()));
        let c1 = match hold {
            Formula::Atom(Assertion::True) => None,
            _ => Some(self.child(hold, &ctx.scope)),
        };
        let c2 = self.child(goal, &ctx.scope);
        let inv_next = ctx.primed_apply(&inv);

        self.emit(ctx.init.clone(), HeadFormula::App(inv.clone()))?;
        let pending = vec![BodyLit::Pos(inv), c2.negated()];
        if let Some(c1) = &c1 {
            self.emit(pending.clone(), c1.as_head())?;
        }
        let mut body = pending;
        body.push(BodyLit::Constraint(ctx.next.clone()));
        if universal {
            self.emit(body, HeadFormula::App(inv_next))?;
        } else {
            let mut items = ctx.next_head();
            items.push(HeadFormula::App(inv_next));
            self.emit(body, HeadFormula::exists(ctx.primed(), HeadFormula::conj(items)))?;
        }
        if let Some(c1) = c1 {
            self.descend(c1, ctx)?;
        }
        self.descend(c2, ctx)
    }

    fn until(&mut self, universal: bool, hold: &Formula, goal: &Formula, ctx: &GenContext) -> Result<(), GenError> {
        let primed = ctx.primed();
        let inv = ctx.app(&self.fresh("inv", ctx.scope.len()));
        let c1 = match hold {
            Formula::Atom(Assertion::True) => None,
            _ => Some(self.child(hold, &ctx.scope)),
        };
        let c2 = self.child(goal, &ctx.scope);
        let rank_name = self.fresh("rank", 2 * ctx.scope.len());
        let rank = ctx.rank(&rank_name);
        let inv_next = ctx.primed_apply(&inv);

        self.emit(ctx.init.clone(), HeadFormula::App(inv.clone()))?;
        let pending = vec![BodyLit::Pos(inv), c2.negated()];
        let mut step: Vec<HeadFormula> = c1.iter().map(Child::as_head).collect();
        if universal {
            step.push(HeadFormula::exists(primed, HeadFormula::conj(ctx.next_head())));
            self.emit(pending.clone(), HeadFormula::conj(step))?;
            let mut body = pending;
            body.push(BodyLit::Constraint(ctx.next.clone()));
            self.emit(
                body,
                HeadFormula::conj([HeadFormula::App(inv_next), HeadFormula::App(rank)]),
            )?;
        } else {
            let mut items = ctx.next_head();
            items.push(HeadFormula::App(inv_next));
            items.push(HeadFormula::App(rank));
            step.push(HeadFormula::exists(primed, HeadFormula::conj(items)));
            self.emit(pending, HeadFormula::conj(step))?;
        }
        self.hs.add_wf(&rank_name)?;
        if let Some(c1) = c1 {
            self.descend(c1, ctx)?;
        }
        self.descend(c2, ctx)
    }
}

fn fmt_guard(c: &Assertion) -> String {
    if c.is_compound() {
        format!("({c})")
    } else {
        c.to_string()
    }
}

/// `next && x' = x`.
fn frame(next: &Assertion, x: &Var) -> Assertion {
    let eq = Assertion::eq(Term::Var(x.prime()), Term::Var(x.clone()));
    match next {
        Assertion::True => eq,
        _ => Assertion::and(next.clone(), eq),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::horn::emit_textual;
    use crate::system::parse_system;

    fn sys(text: &str) -> TransitionSystem {
        parse_system(text).unwrap()
    }

    #[test]
    fn register_growth_example() {
        let ts = sys("vars v; init v >= 0; next v' = v + 1 || v' = v;");
        let f = parse_formula("forall x: v = x -> EF(v > x)").unwrap();
        let (hs, trace) = gen_trace(&ts, &f).unwrap();
        let expected = "v >= 0 => (v = x -> aux_0(v, x))\n\
                        aux_0(v, x) => inv_0(v, x)\n\
                        inv_0(v, x) && !(v > x) => exists v', x'. (v' = v + 1 || v' = v) && x' = x && inv_0(v', x') && rank_0(v, x, v', x')\n\
                        wf(rank_0)\n";
        assert_eq!(emit_textual(&hs), expected);
        let rows: Vec<(&str, Vec<&str>, &str)> = trace
            .iter()
            .map(|t| (t.formula.as_str(), t.scope.iter().map(|s| s.as_str()).collect(), t.init.as_str()))
            .collect();
        assert_eq!(
            rows,
            vec![
                ("forall x: v = x -> EF(v > x)", vec!["v"], "v >= 0"),
                ("v = x -> EF(v > x)", vec!["v", "x"], "v >= 0"),
                ("v = x -> aux_0(v, x)", vec!["v", "x"], "v >= 0"),
                ("EF(v > x)", vec!["v", "x"], "aux_0(v, x)"),
            ]
        );
        assert_eq!(trace[0].next, "v' = v + 1 || v' = v");
        assert_eq!(trace[3].next, "(v' = v + 1 || v' = v) && x' = x");
    }

    #[test]
    fn atom_is_a_single_clause() {
        let ts = sys("vars v; init v = 0; next v' = v + 1;");
        let (hs, trace) = gen_trace(&ts, &parse_formula("true").unwrap()).unwrap();
        assert_eq!(emit_textual(&hs), "v = 0 => true\n");
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn residual_negation_is_rejected() {
        let ts = sys("vars v; init v = 0; next v' = v;");
        let f = Formula::not(parse_formula("AG(v = 0)").unwrap());
        assert!(matches!(gen(&ts, &f), Err(GenError::UnsupportedConstruct(_))));
    }

    #[test]
    fn temporal_rules() {
        let ts = sys("vars v; init v = 0; next v' = v + 1;");
        let cases = [
            ("AX(v = 1)", "v = 0 => exists v'. v' = v + 1\nv = 0 && v' = v + 1 => v' = 1\n"),
            ("EX(v = 1)", "v = 0 => exists v'. v' = v + 1 && v' = 1\n"),
            ("AG(v >= 0)", "v = 0 => inv_0(v)\ninv_0(v) && v' = v + 1 => inv_0(v')\ninv_0(v) => v >= 0\n"),
            (
                "EG(v >= 0)",
                "v = 0 => inv_0(v)\ninv_0(v) && v' = v + 1 => exists v'. v' = v + 1 && inv_0(v')\ninv_0(v) => v >= 0\n",
            ),
            (
                "A(v >= 0 U v = 2)",
                "v = 0 => inv_0(v)\n\
                 inv_0(v) && !(v = 2) => v >= 0 && (exists v'. v' = v + 1)\n\
                 inv_0(v) && !(v = 2) && v' = v + 1 => inv_0(v') && rank_0(v, v')\n\
                 wf(rank_0)\n",
            ),
            (
                "E(v >= 0 U v = 2)",
                "v = 0 => inv_0(v)\n\
                 inv_0(v) && !(v = 2) => v >= 0 && (exists v'. v' = v + 1 && inv_0(v') && rank_0(v, v'))\n\
                 wf(rank_0)\n",
            ),
            (
                "AF(v = 2)",
                "v = 0 => inv_0(v)\n\
                 inv_0(v) && !(v = 2) => exists v'. v' = v + 1\n\
                 inv_0(v) && !(v = 2) && v' = v + 1 => inv_0(v') && rank_0(v, v')\n\
                 wf(rank_0)\n",
            ),
        ];
        for (f, expected) in cases {
            let hs = gen(&ts, &parse_formula(f).unwrap()).unwrap();
            assert_eq!(emit_textual(&hs), expected, "for {f}");
        }
    }

    #[test]
    fn weak_until_has_no_ranking() {
        let ts = sys("vars v; init v = 0; next v' = v + 1;");
        let f = crate::formula::negation_normal_form(&parse_formula("!E(v < 2 U v = 5)").unwrap());
        let hs = gen(&ts, &f).unwrap();
        assert_eq!(
            emit_textual(&hs),
            "v = 0 => inv_0(v)\n\
             inv_0(v) && !(v >= 2 && v != 5) => v != 5\n\
             inv_0(v) && !(v >= 2 && v != 5) && v' = v + 1 => inv_0(v')\n"
        );
    }

    #[test]
    fn nested_children_get_fresh_predicates() {
        let ts = sys("vars v; init v = 0; next v' = v + 1;");
        let f = parse_formula("exists y: AG(v >= y) && EX(v = y)").unwrap();
        let (hs, trace) = gen_trace(&ts, &f).unwrap();
        let expected = "v = 0 => exists y. aux_0(v, y)\n\
                        aux_0(v, y) => aux_1(v, y) && aux_2(v, y)\n\
                        aux_1(v, y) => inv_0(v, y)\n\
                        inv_0(v, y) && v' = v + 1 && y' = y => inv_0(v', y')\n\
                        inv_0(v, y) => v >= y\n\
                        aux_2(v, y) => exists v', y'. v' = v + 1 && y' = y && v' = y'\n";
        assert_eq!(emit_textual(&hs), expected);
        assert_eq!(trace.len(), 5);
        let sym = &hs.predicates["aux_0"];
        assert_eq!(sym.arity, 2);
    }
}
