//! Textual dump and SMT-LIB 2 (HORN) export.

use std::fmt::{self, Write};

use thiserror::Error;

use super::{BodyLit, HeadFormula, HornClause, HornSystem};
use crate::logic::{Assertion, Rel, Term, Var};

fn fmt_constraint_item(a: &Assertion, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if a.is_compound() {
        write!(f, "({a})")
    } else {
        write!(f, "{a}")
    }
}

/// A head inside a `&&`/`||` list or on the right of a guard.
fn fmt_head_item(h: &HeadFormula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match h {
        HeadFormula::Constraint(a) => fmt_constraint_item(a, f),
        HeadFormula::App(p) => write!(f, "{p}"),
        HeadFormula::Guarded(..) => fmt_head(h, f),
        _ => {
            write!(f, "(")?;
            fmt_head(h, f)?;
            write!(f, ")")
        }
    }
}

fn fmt_head(h: &HeadFormula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match h {
        HeadFormula::Constraint(a) => write!(f, "{a}"),
        HeadFormula::App(p) => write!(f, "{p}"),
        HeadFormula::And(items) | HeadFormula::Or(items) => {
            let sep = if matches!(h, HeadFormula::And(_)) { " && " } else { " || " };
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                fmt_head_item(item, f)?;
            }
            Ok(())
        }
        HeadFormula::Guarded(c, inner) => {
            write!(f, "(")?;
            c.fmt_prec(f, 4)?;
            write!(f, " -> ")?;
            fmt_head_item(inner, f)?;
            write!(f, ")")
        }
        HeadFormula::Exists(vs, inner) => {
            write!(f, "exists ")?;
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ". ")?;
            fmt_head(inner, f)
        }
    }
}

pub(super) fn fmt_clause(c: &HornClause, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.body.is_empty() {
        write!(f, "true")?;
    }
    for (i, l) in c.body.iter().enumerate() {
        if i > 0 {
            write!(f, " && ")?;
        }
        match l {
            BodyLit::Constraint(a) => fmt_constraint_item(a, f)?,
            BodyLit::Pos(p) => write!(f, "{p}")?,
            BodyLit::Neg(p) => write!(f, "!{p}")?,
        }
    }
    write!(f, " => ")?;
    fmt_head(&c.head, f)
}

struct HeadDisplay<'a>(&'a HeadFormula);

impl fmt::Display for HeadDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_head(self.0, f)
    }
}

impl fmt::Display for HeadFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", HeadDisplay(self))
    }
}

/// One line per item: `decl p/n` for predicates no clause mentions, then the
/// clauses in order, then `wf(p)` lines. The empty system prints as "".
pub fn emit_textual(hs: &HornSystem) -> String {
    let used = hs.used_predicates();
    let mut out = String::new();
    for p in hs.predicates.values() {
        if !used.contains(&p.name) {
            writeln!(out, "decl {}/{}", p.name, p.arity).unwrap();
        }
    }
    for c in &hs.clauses {
        writeln!(out, "{c}").unwrap();
    }
    for w in &hs.wf {
        writeln!(out, "wf({w})").unwrap();
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not exportable: {0}")]
pub struct NotExportable(pub String);

fn smt_var(v: &Var) -> String {
    if v.primed {
        format!("|{}'|", v.name)
    } else {
        v.name.clone()
    }
}

fn smt_int(k: i64) -> String {
    if k < 0 {
        format!("(- {})", k.unsigned_abs())
    } else {
        k.to_string()
    }
}

fn smt_term(t: &Term) -> String {
    let l = t.to_linear();
    let mut parts: Vec<String> = l
        .terms
        .iter()
        .map(|(v, k)| match k {
            1 => smt_var(v),
            -1 => format!("(- {})", smt_var(v)),
            _ => format!("(* {} {})", smt_int(*k), smt_var(v)),
        })
        .collect();
    if l.constant != 0 || parts.is_empty() {
        parts.push(smt_int(l.constant));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn smt_assertion(a: &Assertion) -> String {
    match a {
        Assertion::Cmp(l, r, t) => {
            let op = match r {
                Rel::Eq => "=",
                Rel::Ne => "distinct",
                Rel::Lt => "<",
                Rel::Le => "<=",
                Rel::Gt => ">",
                Rel::Ge => ">=",
            };
            format!("({op} {} {})", smt_term(l), smt_term(t))
        }
        Assertion::True => "true".into(),
        Assertion::False => "false".into(),
        Assertion::And(x, y) => format!("(and {} {})", smt_assertion(x), smt_assertion(y)),
        Assertion::Or(x, y) => format!("(or {} {})", smt_assertion(x), smt_assertion(y)),
        Assertion::Not(x) => format!("(not {})", smt_assertion(x)),
        Assertion::Implies(x, y) => format!("(=> {} {})", smt_assertion(x), smt_assertion(y)),
    }
}

fn smt_app(p: &super::PredApp) -> String {
    if p.args.is_empty() {
        return p.name.clone();
    }
    let args: Vec<String> = p.args.iter().map(smt_var).collect();
    format!("({} {})", p.name, args.join(" "))
}

fn smt_conj(items: &[String]) -> String {
    match items.len() {
        0 => "true".into(),
        1 => items[0].clone(),
        _ => format!("(and {})", items.join(" ")),
    }
}

/// Flattens a head into (extra premises, conclusion) pairs with atomic conclusions.
fn split_head(
    h: &HeadFormula,
    guards: &mut Vec<String>,
    out: &mut Vec<(Vec<String>, String)>,
    clause_no: usize,
) -> Result<(), NotExportable> {
    match h {
        HeadFormula::Constraint(a) => {
            let mut g = guards.clone();
            g.push(format!("(not {})", smt_assertion(a)));
            out.push((g, "false".into()));
        }
        HeadFormula::App(p) => out.push((guards.clone(), smt_app(p))),
        HeadFormula::And(items) => {
            for item in items {
                split_head(item, guards, out, clause_no)?;
            }
        }
        HeadFormula::Guarded(c, inner) => {
            guards.push(smt_assertion(c));
            split_head(inner, guards, out, clause_no)?;
            guards.pop();
        }
        HeadFormula::Or(items) => {
            // Constraint disjuncts move to the premise as negations; at most one
            // predicate disjunct may remain.
            let apps: Vec<&HeadFormula> =
                items.iter().filter(|i| !matches!(i, HeadFormula::Constraint(_))).collect();
            if apps.len() > 1 {
                return Err(NotExportable(format!("disjunctive head in clause {clause_no}")));
            }
            let n = guards.len();
            for i in items {
                if let HeadFormula::Constraint(a) = i {
                    guards.push(format!("(not {})", smt_assertion(a)));
                }
            }
            match apps.first() {
                Some(inner) => split_head(inner, guards, out, clause_no)?,
                None => out.push((guards.clone(), "false".into())),
            }
            guards.truncate(n);
        }
        HeadFormula::Exists(..) => {
            return Err(NotExportable(format!("existential head in clause {clause_no}")))
        }
    }
    Ok(())
}

/// SMT-LIB 2 script in the HORN logic. Only the safety fragment is exportable:
/// no existential heads, no negated premises, no well-foundedness.
pub fn emit_chc(hs: &HornSystem) -> Result<String, NotExportable> {
    let mut asserts = Vec::new();
    for (i, c) in hs.clauses.iter().enumerate() {
        let no = i + 1;
        let mut body = Vec::new();
        for l in &c.body {
            match l {
                BodyLit::Constraint(a) => body.push(smt_assertion(a)),
                BodyLit::Pos(p) => body.push(smt_app(p)),
                BodyLit::Neg(p) => {
                    return Err(NotExportable(format!(
                        "negated predicate `{}` in clause {no}",
                        p.name
                    )))
                }
            }
        }
        let mut pieces = Vec::new();
        split_head(&c.head, &mut Vec::new(), &mut pieces, no)?;
        let vars = c.free_vars();
        for (guards, concl) in pieces {
            let mut prem = body.clone();
            prem.extend(guards);
            let imp = format!("(=> {} {})", smt_conj(&prem), concl);
            if vars.is_empty() {
                asserts.push(format!("(assert {imp})"));
            } else {
                let decls: Vec<String> = vars.iter().map(|v| format!("({} Int)", smt_var(v))).collect();
                asserts.push(format!("(assert (forall ({}) {imp}))", decls.join(" ")));
            }
        }
    }
    if let Some(w) = hs.wf.first() {
        return Err(NotExportable(format!("well-foundedness declaration for `{w}`")));
    }
    let mut out = String::from("(set-logic HORN)\n");
    for p in hs.predicates.values() {
        let sorts = vec!["Int"; p.arity].join(" ");
        writeln!(out, "(declare-fun {} ({sorts}) Bool)", p.name).unwrap();
    }
    for a in asserts {
        out.push_str(&a);
        out.push('\n');
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}
