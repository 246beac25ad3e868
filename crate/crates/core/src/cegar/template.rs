//! Skolem templates: parameterized functions from a clause's universal
//! variables to a witness value, plus the configuration mini-language.
//!
//! ```text
//! # comment
//! y: x + [-2..2]                 affine form, one parameter for the offset
//! 2 v': [0..1]*v + [-1..1]*w     only for existentials of clause 2 (1-based)
//! table x': v in 0..2 -> [0..2]  one parameter per key value, key clamped
//! ```
//!
//! A slot is either an integer or a parameter range `[lo..hi]`. A target
//! names an existential variable as written in the clause head.

use std::fmt;

use thiserror::Error;

use crate::logic::{Assertion, Linear, Rel, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("template line {line}: {message}")]
pub struct TemplateError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Fixed(i64),
    Param { lo: i64, hi: i64 },
}

impl Slot {
    fn params(&self) -> Vec<(i64, i64)> {
        match self {
            Slot::Fixed(_) => vec![],
            Slot::Param { lo, hi } => vec![(*lo, *hi)],
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Fixed(c) => write!(f, "{c}"),
            Slot::Param { lo, hi } => write!(f, "[{lo}..{hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    /// `sum coeff_i * var_i + offset`.
    Affine { coeffs: Vec<(Var, Slot)>, offset: Slot },
    /// `values[clamp(key, lo, hi) - lo]`.
    Table { key: Var, lo: i64, values: Vec<Slot> },
    /// Default family: the first parameter picks a basis (one of `vars`, or
    /// the constant basis at index `vars.len()`), the second the offset.
    Basis { vars: Vec<Var>, offset: (i64, i64) },
}

/// Witness function for one existential variable of one clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkolemTemplate {
    pub target: String,
    pub shape: Shape,
}

impl SkolemTemplate {
    /// Default family `target = x_i + c` over `vars`, then `target = c`, with `c` in `[-2, 2]`.
    pub fn default_family(target: &str, vars: Vec<Var>) -> Self {
        SkolemTemplate {
            target: target.to_string(),
            shape: Shape::Basis { vars, offset: (-2, 2) },
        }
    }

    /// Inclusive ranges of the parameters, in order.
    pub fn params(&self) -> Vec<(i64, i64)> {
        match &self.shape {
            Shape::Affine { coeffs, offset } => {
                let mut out: Vec<(i64, i64)> = coeffs.iter().flat_map(|(_, s)| s.params()).collect();
                out.extend(offset.params());
                out
            }
            Shape::Table { values, .. } => values.iter().flat_map(Slot::params).collect(),
            Shape::Basis { vars, offset } => vec![(0, vars.len() as i64), *offset],
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        match &self.shape {
            Shape::Affine { coeffs, .. } => coeffs.iter().map(|(v, _)| v.clone()).collect(),
            Shape::Table { key, .. } => vec![key.clone()],
            Shape::Basis { vars, .. } => vars.clone(),
        }
    }

    fn slots(&self, p: &[i64]) -> (Vec<i64>, i64) {
        let mut it = p.iter().copied();
        let mut take = |s: &Slot| match s {
            Slot::Fixed(c) => *c,
            Slot::Param { .. } => it.next().expect("parameter count"),
        };
        match &self.shape {
            Shape::Affine { coeffs, offset } => {
                let ks = coeffs.iter().map(|(_, s)| take(s)).collect();
                (ks, take(offset))
            }
            Shape::Table { values, .. } => (values.iter().map(&mut take).collect(), 0),
            Shape::Basis { .. } => unreachable!(),
        }
    }

    /// The witness at parameters `p` for the given variable values (same
    /// order as [`Self::vars`]).
    pub fn eval(&self, p: &[i64], values: &[i64]) -> i64 {
        match &self.shape {
            Shape::Basis { vars, .. } => {
                let k = p[0] as usize;
                if k < vars.len() {
                    values[k] + p[1]
                } else {
                    p[1]
                }
            }
            Shape::Affine { .. } => {
                let (ks, c) = self.slots(p);
                ks.iter().zip(values).map(|(k, x)| k * x).sum::<i64>() + c
            }
            Shape::Table { lo, .. } => {
                let (vals, _) = self.slots(p);
                let i = (values[0] - lo).clamp(0, vals.len() as i64 - 1);
                vals[i as usize]
            }
        }
    }

    /// Instantiation as `(target = t, t outside [lo, hi])` over the template
    /// variables, with `target` renamed to `y`.
    pub fn instantiate(&self, p: &[i64], y: &Var, lo: i64, hi: i64) -> (Assertion, Assertion) {
        let out_of = |t: &Term| {
            Assertion::or(
                Assertion::cmp(t.clone(), Rel::Lt, Term::Const(lo)),
                Assertion::cmp(t.clone(), Rel::Gt, Term::Const(hi)),
            )
        };
        let affine = |terms: Vec<(Var, i64)>, c: i64| {
            let mut l = Linear::constant(c);
            for (v, k) in terms {
                l.add_term(v, k);
            }
            let t = Term::from_linear(l);
            (Assertion::eq(Term::Var(y.clone()), t.clone()), out_of(&t))
        };
        match &self.shape {
            Shape::Basis { vars, .. } => {
                let k = p[0] as usize;
                let terms = if k < vars.len() { vec![(vars[k].clone(), 1)] } else { vec![] };
                affine(terms, p[1])
            }
            Shape::Affine { coeffs, .. } => {
                let (ks, c) = self.slots(p);
                affine(coeffs.iter().map(|(v, _)| v.clone()).zip(ks).collect(), c)
            }
            Shape::Table { key, lo: klo, .. } => {
                let (vals, _) = self.slots(p);
                let last = vals.len() - 1;
                let k = Term::Var(key.clone());
                let case = |i: usize| {
                    let at = Term::Const(klo + i as i64);
                    if vals.len() == 1 {
                        Assertion::True
                    } else if i == 0 {
                        Assertion::cmp(k.clone(), Rel::Le, at)
                    } else if i == last {
                        Assertion::cmp(k.clone(), Rel::Ge, at)
                    } else {
                        Assertion::eq(k.clone(), at)
                    }
                };
                let eq = (0..vals.len())
                    .map(|i| Assertion::and(case(i), Assertion::eq(Term::Var(y.clone()), Term::Const(vals[i]))))
                    .reduce(Assertion::or)
                    .unwrap();
                let out = (0..vals.len())
                    .filter(|&i| vals[i] < lo || vals[i] > hi)
                    .map(case)
                    .reduce(Assertion::or)
                    .unwrap_or(Assertion::False);
                (eq, out)
            }
        }
    }

    /// Human-readable instantiation, e.g. `y = x - 1`.
    pub fn describe(&self, p: &[i64]) -> String {
        match &self.shape {
            Shape::Table { key, lo, .. } => {
                let (vals, _) = self.slots(p);
                let cases: Vec<String> = vals
                    .iter()
                    .enumerate()
                    .map(|(i, v)| format!("{}: {v}", lo + i as i64))
                    .collect();
                format!("{} = table {key} {{{}}}", self.target, cases.join(", "))
            }
            _ => {
                let y = Var::new("_");
                let (eq, _) = self.instantiate(p, &y, i64::MIN, i64::MAX);
                match eq {
                    Assertion::Cmp(_, _, t) => format!("{} = {t}", self.target),
                    _ => unreachable!(),
                }
            }
        }
    }
}

impl fmt::Display for SkolemTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Affine { coeffs, offset } => {
                write!(f, "{}: ", self.target)?;
                for (v, s) in coeffs {
                    write!(f, "{s}*{v} + ")?;
                }
                write!(f, "{offset}")
            }
            Shape::Table { key, lo, values } => {
                let hi = lo + values.len() as i64 - 1;
                let vals: Vec<String> = values.iter().map(|s| s.to_string()).collect();
                write!(f, "table {}: {key} in {lo}..{hi} -> {}", self.target, vals.join(", "))
            }
            Shape::Basis { vars, offset } => {
                let vs: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
                write!(f, "{}: one of ({}) + [{}..{}]", self.target, vs.join(", "), offset.0, offset.1)
            }
        }
    }
}

/// A configured template with its scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRule {
    /// 1-based clause number, or `None` for every clause.
    pub clause: Option<usize>,
    pub template: SkolemTemplate,
}

struct Cursor<'a> {
    s: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, TemplateError> {
        Err(TemplateError {
            line: self.line,
            message: message.into(),
        })
    }

    fn ws(&mut self) {
        self.s = self.s.trim_start();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if let Some(rest) = self.s.strip_prefix(tok) {
            self.s = rest;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), TemplateError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected `{tok}` at `{}`", self.s))
        }
    }

    fn int(&mut self) -> Result<i64, TemplateError> {
        self.ws();
        let neg = self.s.starts_with('-');
        let body = if neg { &self.s[1..] } else { self.s };
        let len = body.bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return self.err(format!("expected integer at `{}`", self.s));
        }
        let text = &self.s[..len + neg as usize];
        self.s = &self.s[len + neg as usize..];
        text.parse().or_else(|_| self.err(format!("integer `{text}` out of range")))
    }

    fn peek_ident(&self) -> Option<&'a str> {
        let s = self.s.trim_start();
        let len = s
            .char_indices()
            .take_while(|&(i, c)| c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit()))
            .count();
        (len > 0).then(|| &s[..len])
    }

    fn ident(&mut self) -> Result<&'a str, TemplateError> {
        match self.peek_ident() {
            Some(id) => {
                self.ws();
                self.s = &self.s[id.len()..];
                Ok(id)
            }
            None => self.err(format!("expected identifier at `{}`", self.s)),
        }
    }

    fn var(&mut self) -> Result<Var, TemplateError> {
        let name = self.ident()?;
        Ok(if self.s.starts_with('\'') {
            self.s = &self.s[1..];
            Var::primed(name)
        } else {
            Var::new(name)
        })
    }

    fn slot(&mut self) -> Result<Slot, TemplateError> {
        if self.eat("[") {
            let lo = self.int()?;
            self.expect("..")?;
            let hi = self.int()?;
            self.expect("]")?;
            if lo > hi {
                return self.err(format!("empty parameter range [{lo}..{hi}]"));
            }
            Ok(Slot::Param { lo, hi })
        } else {
            Ok(Slot::Fixed(self.int()?))
        }
    }

    fn done(&mut self) -> Result<(), TemplateError> {
        self.ws();
        if self.s.is_empty() {
            Ok(())
        } else {
            self.err(format!("unexpected `{}`", self.s))
        }
    }
}

pub fn parse_templates(text: &str) -> Result<Vec<TemplateRule>, TemplateError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut c = Cursor { s: line, line: i + 1 };
        let clause = if c.s.starts_with(|ch: char| ch.is_ascii_digit()) {
            let n = c.int()?;
            if n < 1 {
                return c.err("clause numbers start at 1");
            }
            Some(n as usize)
        } else {
            None
        };
        let table = c.peek_ident() == Some("table") && {
            let rest = c.s.trim_start()["table".len()..].trim_start();
            !rest.starts_with(':') && !rest.starts_with('\'')
        };
        if table {
            c.ident()?;
        }
        let target = c.var()?.to_string();
        c.expect(":")?;
        let shape = if table {
            let key = c.var()?;
            if c.ident()? != "in" {
                return c.err("expected `in`");
            }
            let lo = c.int()?;
            c.expect("..")?;
            let hi = c.int()?;
            if lo > hi {
                return c.err(format!("empty key range {lo}..{hi}"));
            }
            c.expect("->")?;
            let first = c.slot()?;
            let mut values = vec![first];
            while c.eat(",") {
                values.push(c.slot()?);
            }
            let width = (hi - lo + 1) as usize;
            if values.len() == 1 {
                values = vec![first; width];
            } else if values.len() != width {
                return c.err(format!("table over {lo}..{hi} needs 1 or {width} values"));
            }
            Shape::Table { key, lo, values }
        } else {
            let mut coeffs: Vec<(Var, Slot)> = Vec::new();
            let mut offset = 0i64;
            let mut offset_slot: Option<Slot> = None;
            let mut sign = 1;
            loop {
                if c.peek_ident().is_some() {
                    let v = c.var()?;
                    coeffs.push((v, Slot::Fixed(sign)));
                } else {
                    let s = c.slot()?;
                    if c.eat("*") {
                        let v = c.var()?;
                        let s = match s {
                            Slot::Fixed(k) => Slot::Fixed(sign * k),
                            p if sign == 1 => p,
                            _ => return c.err("a parameter coefficient cannot be negated"),
                        };
                        coeffs.push((v, s));
                    } else {
                        match s {
                            Slot::Fixed(k) => offset += sign * k,
                            p => {
                                if offset_slot.is_some() || sign != 1 {
                                    return c.err("at most one added parameter offset");
                                }
                                offset_slot = Some(p);
                            }
                        }
                    }
                }
                if c.eat("+") {
                    sign = 1;
                } else if c.eat("-") {
                    sign = -1;
                } else {
                    break;
                }
            }
            let offset = match offset_slot {
                Some(Slot::Param { lo, hi }) => Slot::Param {
                    lo: lo + offset,
                    hi: hi + offset,
                },
                _ => Slot::Fixed(offset),
            };
            Shape::Affine { coeffs, offset }
        };
        c.done()?;
        rules.push(TemplateRule {
            clause,
            template: SkolemTemplate { target, shape },
        });
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_affine_and_table_lines() {
        let rules = parse_templates("# witnesses\ny: x + [-2..2]\n2 v': [0..1]*v - 1\ntable x': v in 0..2 -> [0..2]\n").unwrap();
        assert_eq!(rules.len(), 3);
        assert_eq!(rules[0].clause, None);
        assert_eq!(rules[0].template.params(), vec![(-2, 2)]);
        assert_eq!(rules[1].clause, Some(2));
        assert_eq!(rules[1].template.target, "v'");
        assert_eq!(rules[1].template.params(), vec![(0, 1)]);
        assert_eq!(rules[1].template.eval(&[1], &[5]), 4);
        assert_eq!(rules[2].template.params(), vec![(0, 2); 3]);
        assert_eq!(rules[2].template.eval(&[7, 8, 9], &[-4]), 7);
        assert_eq!(rules[2].template.eval(&[7, 8, 9], &[1]), 8);
        assert_eq!(rules[2].template.eval(&[7, 8, 9], &[6]), 9);
    }

    #[test]
    fn reports_bad_lines() {
        let err = parse_templates("y: x +\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(parse_templates("\n\ny: [3..1]\n").unwrap_err().line == 3);
        assert!(parse_templates("table y: x in 0..2 -> 1, 2\n").is_err());
    }

    #[test]
    fn default_family_order() {
        let t = SkolemTemplate::default_family("y", vec![Var::new("x")]);
        assert_eq!(t.params(), vec![(0, 1), (-2, 2)]);
        assert_eq!(t.describe(&[0, -1]), "y = x - 1");
        assert_eq!(t.describe(&[1, 2]), "y = 2");
        assert_eq!(t.eval(&[0, -1], &[3]), 2);
    }

    #[test]
    fn instantiation_agrees_with_eval() {
        let rules = parse_templates("y: 2*x - [0..3]\ntable y: x in -1..1 -> 4, [0..2], -3\n");
        // A subtracted parameter is rejected; the table line alone is fine.
        assert!(rules.is_err());
        let rules = parse_templates("y: 2*x + [0..3]\ntable y: x in -1..1 -> 4, [0..2], -3\n").unwrap();
        let y = Var::new("y");
        for r in &rules {
            let t = &r.template;
            let (lo, hi) = t.params()[0];
            for p in lo..=hi {
                let (eq, out) = t.instantiate(&[p], &y, -2, 2);
                for x in -3..=3 {
                    let w = t.eval(&[p], &[x]);
                    let s = crate::logic::State::from_pairs([("x", x), ("y", w)]);
                    assert!(eq.eval(&s).unwrap());
                    let s2 = s.with(y.clone(), w + 1);
                    assert!(!eq.eval(&s2).unwrap());
                    assert_eq!(out.eval(&s).unwrap(), !(-2..=2).contains(&w));
                }
            }
        }
    }
}
