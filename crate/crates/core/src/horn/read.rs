//! Reader for the textual dump produced by [`super::emit_textual`].

use super::{BodyLit, HeadFormula, HornClause, HornError, HornSystem, PredApp};
use crate::syntax::{self, Node, ParseError, Parser, Pos, SNode, Tok};

fn shift(e: ParseError, line: usize) -> ParseError {
    ParseError {
        pos: Pos {
            line,
            column: e.pos.column,
        },
        ..e
    }
}

pub fn read_textual(text: &str) -> Result<HornSystem, HornError> {
    let mut hs = HornSystem::new();
    let mut clauses = Vec::new();
    let mut wf = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut p = Parser::new(line).map_err(|e| shift(e, no))?;
        if p.is_keyword("decl") && matches!(p.peek_at(1), Tok::Ident(_)) {
            p.bump();
            let name = p.ident().map_err(|e| shift(e, no))?;
            p.expect(&Tok::Slash).map_err(|e| shift(e, no))?;
            let arity = p.int().map_err(|e| shift(e, no))?;
            p.expect_eof().map_err(|e| shift(e, no))?;
            hs.declare(&name, arity as usize)?;
            continue;
        }
        if p.is_keyword("wf") && matches!(p.peek_at(1), Tok::LParen) {
            p.bump();
            p.bump();
            let name = p.ident().map_err(|e| shift(e, no))?;
            p.expect(&Tok::RParen).map_err(|e| shift(e, no))?;
            p.expect_eof().map_err(|e| shift(e, no))?;
            wf.push(name);
            continue;
        }
        let clause = (|| {
            let body = p.expr()?;
            p.expect(&Tok::FatArrow)?;
            let head = p.expr()?;
            p.expect_eof()?;
            Ok::<_, ParseError>(HornClause::new(to_body(&body)?, to_head(&head)?))
        })()
        .map_err(|e| shift(e, no))?;
        for app in clause.apps() {
            if hs.arity(&app.name).is_none() {
                hs.declare(&app.name, app.args.len())?;
            }
        }
        clauses.push(clause);
    }
    for c in clauses {
        hs.add_clause(c)?;
    }
    for w in wf {
        hs.add_wf(&w)?;
    }
    Ok(hs)
}

fn app(n: &SNode) -> Option<PredApp> {
    match &n.strip_parens().node {
        Node::App(name, args) => Some(PredApp::new(name.clone(), args.clone())),
        _ => None,
    }
}

fn to_body(n: &SNode) -> Result<Vec<BodyLit>, ParseError> {
    let mut out = Vec::new();
    for item in syntax::flatten_and(n) {
        if item.is_pure() {
            out.push(BodyLit::Constraint(syntax::to_assertion(item)?));
        } else if let Some(p) = app(item) {
            out.push(BodyLit::Pos(p));
        } else if let Node::Not(inner) = &item.strip_parens().node {
            match app(inner) {
                Some(p) => out.push(BodyLit::Neg(p)),
                None => return Err(ParseError::at(item.pos, "predicate application after `!`", "formula")),
            }
        } else {
            return Err(ParseError::at(item.pos, "body literal", "formula"));
        }
    }
    Ok(out)
}

fn to_head(n: &SNode) -> Result<HeadFormula, ParseError> {
    if n.is_pure() {
        return Ok(HeadFormula::Constraint(syntax::to_assertion(n)?));
    }
    Ok(match &n.node {
        Node::Paren(inner) => to_head(inner)?,
        Node::App(name, args) => HeadFormula::App(PredApp::new(name.clone(), args.clone())),
        Node::And(..) => {
            let items = syntax::flatten_and(n)
                .into_iter()
                .map(to_head)
                .collect::<Result<Vec<_>, _>>()?;
            HeadFormula::conj(items)
        }
        Node::Or(..) => {
            let items = syntax::flatten_or(n)
                .into_iter()
                .map(to_head)
                .collect::<Result<Vec<_>, _>>()?;
            HeadFormula::disj(items)
        }
        Node::Implies(c, h) => {
            if !c.is_pure() {
                return Err(ParseError::at(c.pos, "constraint guard", "formula"));
            }
            HeadFormula::guarded(syntax::to_assertion(c)?, to_head(h)?)
        }
        Node::Quant {
            forall: false,
            vars,
            body,
        } => HeadFormula::exists(vars.clone(), to_head(body)?),
        _ => return Err(ParseError::at(n.pos, "clause head", "unsupported construct")),
    })
}
