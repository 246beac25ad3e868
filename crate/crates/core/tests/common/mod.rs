//! Seeded generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use ctlfo::formula::Formula;
use ctlfo::logic::{parse_assertion, Assertion};
use ctlfo::system::{parse_system, DomainBound, TransitionSystem};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bound(lo: i64, hi: i64) -> DomainBound {
    DomainBound::new(lo, hi).unwrap()
}

const PROGRAM_VARS: [&str; 2] = ["v", "w"];
const DATA_VARS: [&str; 3] = ["x", "y", "z"];

fn constant(r: &mut ChaCha8Rng) -> i64 {
    r.gen_range(-2..=2)
}

/// A comparison between two in-scope names or a name and a constant.
pub fn random_atom(r: &mut ChaCha8Rng, scope: &[String]) -> Assertion {
    let rel = ["=", "!=", "<", "<=", ">", ">="].choose(r).unwrap();
    let lhs = scope.choose(r).unwrap().clone();
    let rhs = if scope.len() > 1 && r.gen_bool(0.5) {
        let other: Vec<&String> = scope.iter().filter(|s| **s != lhs).collect();
        (*other.choose(r).unwrap()).clone()
    } else {
        constant(r).to_string()
    };
    let text = if r.gen_bool(0.15) { "true".to_string() } else { format!("{lhs} {rel} {rhs}") };
    parse_assertion(&text).unwrap()
}

fn update(r: &mut ChaCha8Rng, vars: &[&str], target: &str) -> String {
    match r.gen_range(0..6) {
        0 | 1 => format!("{target}' = {target} + 1"),
        2 => format!("{target}' = {target} - 1"),
        3 => format!("{target}' = {target}"),
        4 => format!("{target}' = {}", constant(r)),
        _ => {
            let src = vars.choose(r).unwrap();
            format!("{target}' = {src}")
        }
    }
}

/// One or two program variables, a simple initial condition and a
/// transition relation made of one to three guarded update branches.
/// About half of the systems include a stutter branch, which makes them total.
pub fn random_system(r: &mut ChaCha8Rng) -> TransitionSystem {
    let n = r.gen_range(1..=2);
    let vars = &PROGRAM_VARS[..n];
    let scope: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let init = if r.gen_bool(0.2) {
        "true".to_string()
    } else {
        let a = random_atom(r, &scope);
        format!("{a}")
    };
    let mut branches = Vec::new();
    for _ in 0..r.gen_range(1..=3) {
        let mut parts: Vec<String> = vars.iter().map(|t| update(r, vars, t)).collect();
        if r.gen_bool(0.3) {
            parts.insert(0, random_atom(r, &scope).to_string());
        }
        branches.push(format!("({})", parts.join(" && ")));
    }
    if r.gen_bool(0.5) {
        let stay: Vec<String> = vars.iter().map(|t| format!("{t}' = {t}")).collect();
        branches.push(format!("({})", stay.join(" && ")));
    }
    let text = format!("vars {}; init {}; next {};", vars.join(", "), init, branches.join(" || "));
    parse_system(&text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Closed formula of depth at most `depth` with at most `max_scope`
/// variables in scope at any point (program variables included).
pub fn random_formula(r: &mut ChaCha8Rng, ts: &TransitionSystem, depth: usize, max_scope: usize) -> Formula {
    let scope: Vec<String> = ts.vars.clone();
    gen_formula(r, &scope, depth, max_scope)
}

fn gen_formula(r: &mut ChaCha8Rng, scope: &[String], depth: usize, max_scope: usize) -> Formula {
    if depth == 0 || r.gen_bool(0.15) {
        return Formula::Atom(random_atom(r, scope));
    }
    let d = depth - 1;
    let sub = |r: &mut ChaCha8Rng| gen_formula(r, scope, d, max_scope);
    match r.gen_range(0..13) {
        0 | 1 if scope.len() < max_scope => {
            let x = DATA_VARS.iter().find(|x| !scope.iter().any(|s| s == *x)).unwrap();
            let mut inner = scope.to_vec();
            inner.push(x.to_string());
            let body = gen_formula(r, &inner, d, max_scope);
            if r.gen_bool(0.5) {
                Formula::forall(x, body)
            } else {
                Formula::exists(x, body)
            }
        }
        2 => Formula::and(sub(r), sub(r)),
        3 => Formula::or(sub(r), sub(r)),
        4 => Formula::ax(sub(r)),
        5 => Formula::ex(sub(r)),
        6 => Formula::ag(sub(r)),
        7 => Formula::eg(sub(r)),
        8 => Formula::af(sub(r)),
        9 => Formula::ef(sub(r)),
        10 => Formula::au(sub(r), sub(r)),
        11 => Formula::eu(sub(r), sub(r)),
        _ => Formula::implies(random_atom(r, scope), sub(r)),
    }
}

pub mod ground;
