//! CTL+FO formulas: syntax tree, parsing, `F` desugaring, negation normal form
//! and binder hygiene checks.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::logic::{Assertion, Var};
use crate::syntax::{self, Node, ParseError, SNode, TempOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("bound variable `{ident}` shadows {location}")]
    Shadowing { ident: String, location: String },
    #[error("variable `{0}` is not bound by a quantifier and is not a program variable")]
    Unbound(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Atom(Assertion),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `c -> f` with a theory assertion on the left; means `!c || f`.
    Implies(Assertion, Box<Formula>),
    /// Only present before [`negation_normal_form`].
    Not(Box<Formula>),
    A(Box<PathFormula>),
    E(Box<PathFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathFormula {
    Next(Formula),
    Globally(Formula),
    Until(Formula, Formula),
    /// Sugar for `Until(true, f)`.
    Finally(Formula),
    /// Weak until: the first formula holds until the second does, or forever.
    /// Not part of the surface syntax; produced by negation normal form.
    WeakUntil(Formula, Formula),
}

impl Formula {
    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(c: Assertion, f: Formula) -> Formula {
        Formula::Implies(c, Box::new(f))
    }

    pub fn ax(f: Formula) -> Formula {
        Formula::A(Box::new(PathFormula::Next(f)))
    }

    pub fn ex(f: Formula) -> Formula {
        Formula::E(Box::new(PathFormula::Next(f)))
    }

    pub fn ag(f: Formula) -> Formula {
        Formula::A(Box::new(PathFormula::Globally(f)))
    }

    pub fn eg(f: Formula) -> Formula {
        Formula::E(Box::new(PathFormula::Globally(f)))
    }

    pub fn af(f: Formula) -> Formula {
        Formula::A(Box::new(PathFormula::Finally(f)))
    }

    pub fn ef(f: Formula) -> Formula {
        Formula::E(Box::new(PathFormula::Finally(f)))
    }

    pub fn au(a: Formula, b: Formula) -> Formula {
        Formula::A(Box::new(PathFormula::Until(a, b)))
    }

    pub fn eu(a: Formula, b: Formula) -> Formula {
        Formula::E(Box::new(PathFormula::Until(a, b)))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// Node count, counting path operators and atoms as one node each.
    pub fn size(&self) -> usize {
        match self {
            Formula::Forall(_, f) | Formula::Exists(_, f) | Formula::Not(f) => 1 + f.size(),
            Formula::Atom(_) => 1,
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.size() + b.size(),
            Formula::Implies(_, f) => 2 + f.size(),
            Formula::A(p) | Formula::E(p) => 1 + p.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Forall(_, f) | Formula::Exists(_, f) | Formula::Not(f) => 1 + f.depth(),
            Formula::Atom(_) => 0,
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Implies(_, f) => 1 + f.depth(),
            Formula::A(p) | Formula::E(p) => 1 + p.children().iter().map(|f| f.depth()).max().unwrap_or(0),
        }
    }

    pub fn contains_finally(&self) -> bool {
        match self {
            Formula::Forall(_, f) | Formula::Exists(_, f) | Formula::Not(f) | Formula::Implies(_, f) => {
                f.contains_finally()
            }
            Formula::Atom(_) => false,
            Formula::And(a, b) | Formula::Or(a, b) => a.contains_finally() || b.contains_finally(),
            Formula::A(p) | Formula::E(p) => {
                matches!(**p, PathFormula::Finally(_))
                    || p.children().iter().any(|f| f.contains_finally())
            }
        }
    }

    pub fn contains_negation(&self) -> bool {
        match self {
            Formula::Not(_) => true,
            Formula::Forall(_, f) | Formula::Exists(_, f) | Formula::Implies(_, f) => {
                f.contains_negation()
            }
            Formula::Atom(_) => false,
            Formula::And(a, b) | Formula::Or(a, b) => a.contains_negation() || b.contains_negation(),
            Formula::A(p) | Formula::E(p) => p.children().iter().any(|f| f.contains_negation()),
        }
    }

    /// Variables referenced by atoms that are not bound inside `self`.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<Var>) {
        let mut atom = |a: &Assertion, bound: &Vec<String>| {
            for v in a.free_vars() {
                if v.primed || !bound.contains(&v.name) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::Forall(x, f) | Formula::Exists(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            Formula::Atom(a) => atom(a, bound),
            Formula::Implies(a, f) => {
                atom(a, bound);
                f.collect_free(bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::A(p) | Formula::E(p) => {
                for f in p.children() {
                    f.collect_free(bound, out);
                }
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Implies(..) => 3,
            Formula::Atom(a) if a.is_compound() => {
                match a {
                    Assertion::Or(..) => 1,
                    Assertion::And(..) => 2,
                    _ => 3,
                }
            }
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Formula::Forall(x, g) => {
                write!(f, "forall {x}: ")?;
                g.fmt_prec(f, 0)
            }
            Formula::Exists(x, g) => {
                write!(f, "exists {x}: ")?;
                g.fmt_prec(f, 0)
            }
            Formula::Atom(a) => a.fmt_prec(f, 0),
            Formula::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " || ")?;
                b.fmt_prec(f, 2)
            }
            Formula::And(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " && ")?;
                b.fmt_prec(f, 3)
            }
            Formula::Implies(c, g) => {
                c.fmt_prec(f, 4)?;
                write!(f, " -> ")?;
                g.fmt_prec(f, 3)
            }
            Formula::Not(g) => {
                write!(f, "!")?;
                g.fmt_prec(f, 4)
            }
            Formula::A(p) => p.fmt_with(f, 'A'),
            Formula::E(p) => p.fmt_with(f, 'E'),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl PathFormula {
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            PathFormula::Next(f) | PathFormula::Globally(f) | PathFormula::Finally(f) => vec![f],
            PathFormula::Until(a, b) | PathFormula::WeakUntil(a, b) => vec![a, b],
        }
    }

    fn size(&self) -> usize {
        1 + self.children().iter().map(|f| f.size()).sum::<usize>()
    }

    fn map(&self, g: &mut impl FnMut(&Formula) -> Formula) -> PathFormula {
        match self {
            PathFormula::Next(f) => PathFormula::Next(g(f)),
            PathFormula::Globally(f) => PathFormula::Globally(g(f)),
            PathFormula::Until(a, b) => PathFormula::Until(g(a), g(b)),
            PathFormula::WeakUntil(a, b) => PathFormula::WeakUntil(g(a), g(b)),
            PathFormula::Finally(f) => PathFormula::Finally(g(f)),
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, q: char) -> fmt::Result {
        match self {
            PathFormula::Next(g) => write!(f, "{q}X({g})"),
            PathFormula::Globally(g) => write!(f, "{q}G({g})"),
            PathFormula::Finally(g) => write!(f, "{q}F({g})"),
            PathFormula::Until(a, b) | PathFormula::WeakUntil(a, b) => {
                let op = if matches!(self, PathFormula::Until(..)) { "U" } else { "W" };
                write!(f, "{q}(")?;
                a.fmt_prec(f, 1)?;
                write!(f, " {op} ")?;
                b.fmt_prec(f, 1)?;
                write!(f, ")")
            }
        }
    }
}

/// Parses a formula and checks that no binder repeats along a scope chain.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let node = syntax::parse_complete(text)?;
    let f = to_formula(&node)?;
    check_no_shadowing(&f, &[])?;
    Ok(f)
}

fn to_formula(n: &SNode) -> Result<Formula, ParseError> {
    if n.is_pure() {
        let a = syntax::to_assertion(n)?;
        if let Some(v) = a.free_vars().into_iter().find(|v| v.primed) {
            return Err(ParseError::at(n.pos, "unprimed variable in formula", v.to_string()));
        }
        return Ok(Formula::Atom(a));
    }
    Ok(match &n.node {
        Node::Quant { forall, vars, body } => {
            let mut f = to_formula(body)?;
            for v in vars.iter().rev() {
                if v.primed {
                    return Err(ParseError::at(n.pos, "unprimed bound variable", v.to_string()));
                }
                f = if *forall {
                    Formula::Forall(v.name.clone(), Box::new(f))
                } else {
                    Formula::Exists(v.name.clone(), Box::new(f))
                };
            }
            f
        }
        Node::And(a, b) => Formula::and(to_formula(a)?, to_formula(b)?),
        Node::Or(a, b) => Formula::or(to_formula(a)?, to_formula(b)?),
        Node::Implies(a, b) => {
            if !a.is_pure() {
                return Err(ParseError::at(
                    a.pos,
                    "theory assertion on the left of `->`",
                    "temporal or quantified formula",
                ));
            }
            let Formula::Atom(c) = to_formula(a)? else {
                unreachable!("pure subtree converts to an atom")
            };
            Formula::implies(c, to_formula(b)?)
        }
        Node::Not(a) => Formula::not(to_formula(a)?),
        Node::Paren(a) => to_formula(a)?,
        Node::Temporal { op, args } => {
            let first = to_formula(&args[0])?;
            let path = match op {
                TempOp::AX | TempOp::EX => PathFormula::Next(first),
                TempOp::AG | TempOp::EG => PathFormula::Globally(first),
                TempOp::AF | TempOp::EF => PathFormula::Finally(first),
                TempOp::AU | TempOp::EU => PathFormula::Until(first, to_formula(&args[1])?),
            };
            match op {
                TempOp::AX | TempOp::AG | TempOp::AF | TempOp::AU => Formula::A(Box::new(path)),
                _ => Formula::E(Box::new(path)),
            }
        }
        Node::App(name, _) => {
            return Err(ParseError::at(
                n.pos,
                "formula",
                format!("predicate application `{name}`"),
            ))
        }
        Node::True | Node::False | Node::Cmp(..) => unreachable!("pure nodes handled above"),
    })
}

/// Replaces every `F f` by `true U f`.
pub fn desugar(f: &Formula) -> Formula {
    match f {
        Formula::Forall(x, g) => Formula::Forall(x.clone(), Box::new(desugar(g))),
        Formula::Exists(x, g) => Formula::Exists(x.clone(), Box::new(desugar(g))),
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::And(a, b) => Formula::and(desugar(a), desugar(b)),
        Formula::Or(a, b) => Formula::or(desugar(a), desugar(b)),
        Formula::Implies(c, g) => Formula::implies(c.clone(), desugar(g)),
        Formula::Not(g) => Formula::not(desugar(g)),
        Formula::A(p) => Formula::A(Box::new(desugar_path(p))),
        Formula::E(p) => Formula::E(Box::new(desugar_path(p))),
    }
}

fn desugar_path(p: &PathFormula) -> PathFormula {
    match p {
        PathFormula::Finally(g) => PathFormula::Until(Formula::Atom(Assertion::True), desugar(g)),
        other => other.map(&mut desugar),
    }
}

fn and_f(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::Atom(x), Formula::Atom(y)) => Formula::Atom(Assertion::and(x, y)),
        (a, b) => Formula::and(a, b),
    }
}

fn or_f(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::Atom(x), Formula::Atom(y)) => Formula::Atom(Assertion::or(x, y)),
        (a, b) => Formula::or(a, b),
    }
}

/// Pushes negation down to theory atoms. The dualities are exact on systems
/// whose reachable states all have a successor. The negation of an
/// existential until needs a universal weak until: splitting it into
/// `A(.. U ..) || AG(..)` would force every path to take the same branch.
pub fn negation_normal_form(f: &Formula) -> Formula {
    push(f, false)
}

fn push(f: &Formula, neg: bool) -> Formula {
    if !neg {
        return match f {
            Formula::Forall(x, g) => Formula::Forall(x.clone(), Box::new(push(g, false))),
            Formula::Exists(x, g) => Formula::Exists(x.clone(), Box::new(push(g, false))),
            Formula::Atom(a) => Formula::Atom(a.clone()),
            Formula::And(a, b) => Formula::and(push(a, false), push(b, false)),
            Formula::Or(a, b) => Formula::or(push(a, false), push(b, false)),
            Formula::Implies(c, g) => Formula::implies(c.clone(), push(g, false)),
            Formula::Not(g) => push(g, true),
            Formula::A(p) => Formula::A(Box::new(p.map(&mut |g| push(g, false)))),
            Formula::E(p) => Formula::E(Box::new(p.map(&mut |g| push(g, false)))),
        };
    }
    let t = || Formula::Atom(Assertion::True);
    match f {
        Formula::Forall(x, g) => Formula::Exists(x.clone(), Box::new(push(g, true))),
        Formula::Exists(x, g) => Formula::Forall(x.clone(), Box::new(push(g, true))),
        Formula::Atom(a) => Formula::Atom(a.negate()),
        Formula::And(a, b) => or_f(push(a, true), push(b, true)),
        Formula::Or(a, b) => and_f(push(a, true), push(b, true)),
        Formula::Implies(c, g) => and_f(Formula::Atom(c.clone()), push(g, true)),
        Formula::Not(g) => push(g, false),
        Formula::A(p) => match &**p {
            PathFormula::Next(g) => Formula::ex(push(g, true)),
            PathFormula::Globally(g) => Formula::eu(t(), push(g, true)),
            PathFormula::Finally(g) => Formula::eg(push(g, true)),
            PathFormula::Until(a, b) => {
                let na = push(a, true);
                let nb = push(b, true);
                Formula::or(Formula::eu(nb.clone(), and_f(na, nb.clone())), Formula::eg(nb))
            }
            PathFormula::WeakUntil(a, b) => {
                let na = push(a, true);
                let nb = push(b, true);
                Formula::eu(nb.clone(), and_f(na, nb))
            }
        },
        Formula::E(p) => match &**p {
            PathFormula::Next(g) => Formula::ax(push(g, true)),
            PathFormula::Globally(g) => Formula::au(t(), push(g, true)),
            PathFormula::Finally(g) => Formula::ag(push(g, true)),
            PathFormula::Until(a, b) => {
                let na = push(a, true);
                let nb = push(b, true);
                Formula::A(Box::new(PathFormula::WeakUntil(nb.clone(), and_f(na, nb))))
            }
            PathFormula::WeakUntil(a, b) => {
                let na = push(a, true);
                let nb = push(b, true);
                Formula::au(nb.clone(), and_f(na, nb))
            }
        },
    }
}

/// Fails when a binder reuses a name bound further out or a program variable.
pub fn check_no_shadowing(f: &Formula, program_vars: &[String]) -> Result<(), FormulaError> {
    fn walk(f: &Formula, prog: &[String], bound: &mut Vec<String>) -> Result<(), FormulaError> {
        match f {
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let kw = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
                if prog.contains(x) {
                    return Err(FormulaError::Shadowing {
                        ident: x.clone(),
                        location: format!("a program variable at `{kw} {x}`"),
                    });
                }
                if bound.contains(x) {
                    return Err(FormulaError::Shadowing {
                        ident: x.clone(),
                        location: format!("an enclosing binder at `{kw} {x}` (scope: {})", bound.join(", ")),
                    });
                }
                bound.push(x.clone());
                walk(g, prog, bound)?;
                bound.pop();
                Ok(())
            }
            Formula::Atom(_) => Ok(()),
            Formula::Implies(_, g) | Formula::Not(g) => walk(g, prog, bound),
            Formula::And(a, b) | Formula::Or(a, b) => {
                walk(a, prog, bound)?;
                walk(b, prog, bound)
            }
            Formula::A(p) | Formula::E(p) => {
                for g in p.children() {
                    walk(g, prog, bound)?;
                }
                Ok(())
            }
        }
    }
    walk(f, program_vars, &mut Vec::new())
}

/// Fails when an atom mentions a variable that is neither bound nor a program variable.
pub fn check_closed(f: &Formula, program_vars: &[String]) -> Result<(), FormulaError> {
    match f
        .free_vars()
        .into_iter()
        .find(|v| v.primed || !program_vars.contains(&v.name))
    {
        Some(v) => Err(FormulaError::Unbound(v.to_string())),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_assertion;

    fn atom(s: &str) -> Formula {
        Formula::Atom(parse_assertion(s).unwrap())
    }

    #[test]
    fn parses_register_growth_property() {
        let f = parse_formula("forall x: v = x -> EF(v > x)").unwrap();
        let expected = Formula::forall(
            "x",
            Formula::implies(parse_assertion("v = x").unwrap(), Formula::ef(atom("v > x"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_response_shape() {
        let f = parse_formula("exists x: AG(a = x -> AF(r = 1))").unwrap();
        let expected = Formula::exists(
            "x",
            Formula::ag(Formula::implies(
                parse_assertion("a = x").unwrap(),
                Formula::af(atom("r = 1")),
            )),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn quantifier_scopes_to_the_right() {
        let f = parse_formula("exists x: AF(io = x) || AF(ret = x)").unwrap();
        assert!(matches!(f, Formula::Exists(_, ref g) if matches!(**g, Formula::Or(..))));
    }

    #[test]
    fn malformed_until_is_rejected() {
        assert!(matches!(parse_formula("E(p U)"), Err(FormulaError::Parse(_))));
        assert!(parse_formula("E(v = 1 U)").is_err());
    }

    #[test]
    fn pure_subtrees_fold_into_atoms() {
        let f = parse_formula("a = x && r != 5").unwrap();
        assert_eq!(f, atom("a = x && r != 5"));
    }

    #[test]
    fn primed_variables_are_rejected() {
        assert!(parse_formula("EF(v' = 1)").is_err());
    }

    #[test]
    fn desugar_finally() {
        let f = parse_formula("AF(r = 1)").unwrap();
        assert_eq!(desugar(&f), Formula::au(atom("true"), atom("r = 1")));
    }

    #[test]
    fn desugar_leaves_globally_alone() {
        let f = parse_formula("AG(v >= 0)").unwrap();
        assert_eq!(desugar(&f), f);
    }

    #[test]
    fn desugar_is_idempotent() {
        let f = parse_formula("exists x: EF(a = x && AF(r = 1)) || AG(EF(v = 0))").unwrap();
        let once = desugar(&f);
        assert!(!once.contains_finally());
        assert_eq!(desugar(&once), once);
    }

    #[test]
    fn nnf_of_negated_atom() {
        assert_eq!(negation_normal_form(&Formula::not(atom("v > 0"))), atom("v <= 0"));
    }

    #[test]
    fn nnf_of_negated_globally() {
        let f = Formula::not(Formula::ag(atom("p = 1")));
        assert_eq!(negation_normal_form(&f), Formula::eu(atom("true"), atom("p != 1")));
    }

    #[test]
    fn nnf_of_negated_reachability_shape() {
        let f = Formula::not(parse_formula("exists x: EF(a = x && EG(r != 5))").unwrap());
        let expected = Formula::forall(
            "x",
            Formula::ag(Formula::or(
                atom("a != x"),
                Formula::au(atom("true"), atom("r = 5")),
            )),
        );
        assert_eq!(negation_normal_form(&f), expected);
    }

    #[test]
    fn nnf_of_negated_existential_until_is_weak() {
        let f = parse_formula("!E(v != -1 U v <= -2)").unwrap();
        let n = negation_normal_form(&f);
        assert_eq!(n.to_string(), "A(v > -2 W v = -1 && v > -2)");
        assert_eq!(
            negation_normal_form(&Formula::not(n)).to_string(),
            "E(v != -1 || v <= -2 U v <= -2 && (v != -1 || v <= -2))"
        );
    }

    #[test]
    fn nnf_is_idempotent() {
        let f = Formula::not(parse_formula("forall x: A(v = x U EX(w > 0)) && !EG(v = 1)").unwrap());
        let once = negation_normal_form(&f);
        assert!(!once.contains_negation());
        assert_eq!(negation_normal_form(&once), once);
    }

    #[test]
    fn nnf_size_without_until() {
        let f = parse_formula("forall x: AG(a = x -> EX(r = 1 || AF(r = 2))) && EG(v > 0)").unwrap();
        let n = negation_normal_form(&Formula::not(f.clone()));
        assert!(n.size() <= 2 * f.size() + 1, "{} vs {}", n.size(), f.size());
    }

    #[test]
    fn shadowing_nested_binder() {
        let f = Formula::forall("x", Formula::exists("x", atom("x = 0")));
        assert!(matches!(
            check_no_shadowing(&f, &[]),
            Err(FormulaError::Shadowing { ident, .. }) if ident == "x"
        ));
    }

    #[test]
    fn distinct_binders_are_fine() {
        let f = Formula::forall("x", Formula::exists("y", atom("x = y")));
        assert!(check_no_shadowing(&f, &["v".into()]).is_ok());
    }

    #[test]
    fn shadowing_program_variable() {
        let f = Formula::forall("v", atom("v = 0"));
        assert!(matches!(
            check_no_shadowing(&f, &["v".into()]),
            Err(FormulaError::Shadowing { ident, .. }) if ident == "v"
        ));
    }

    #[test]
    fn parse_rejects_shadowing() {
        assert!(matches!(
            parse_formula("forall x: exists x: x = 0"),
            Err(FormulaError::Shadowing { .. })
        ));
    }

    #[test]
    fn closedness() {
        let f = parse_formula("EF(v > x)").unwrap();
        assert_eq!(check_closed(&f, &["v".into()]), Err(FormulaError::Unbound("x".into())));
        let g = parse_formula("forall x: EF(v > x)").unwrap();
        assert!(check_closed(&g, &["v".into()]).is_ok());
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for text in [
            "forall x: v = x -> EF(v > x)",
            "exists x: EF(a = x && EG(r != 5))",
            "exists x: AG(io != x) || AG(ret != x)",
            "A((v = 0 || w = 1) U forall y: EX(v = y))",
            "!(AG(v = 0) && exists y: w = y) || AX(v > 0 -> EX(w < 1))",
            "(exists x: v = x) && AF(v = 1)",
        ] {
            let f = parse_formula(text).unwrap();
            let back = parse_formula(&f.to_string()).unwrap();
            assert_eq!(back, f, "{text} printed as {f}");
        }
    }
}
