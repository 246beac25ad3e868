//! Independent validation of solutions: clause-by-clause evaluation against
//! relation membership, and acyclicity of every well-founded relation.

use std::collections::{BTreeMap, BTreeSet};

use super::Solution;
use crate::horn::GroundSystem;

/// True when every ground clause holds under `sol` and every well-founded
/// predicate is interpreted by an acyclic relation whose levels (when
/// present) strictly decrease along its pairs.
pub fn check_solution(gs: &GroundSystem, sol: &Solution) -> bool {
    let holds = |id: usize| {
        let a = &gs.atoms[id];
        sol.holds(&gs.preds[a.pred].0, &a.args)
    };
    for c in &gs.clauses {
        let body = c.pos.iter().all(|&a| holds(a)) && c.neg.iter().all(|&a| !holds(a));
        if body && !c.head.iter().any(|d| d.iter().all(|&a| holds(a))) {
            return false;
        }
    }
    for g in &gs.wf {
        let (name, arity) = &gs.preds[g.pred];
        let half = arity / 2;
        let pairs: Vec<(Vec<i64>, Vec<i64>)> = sol
            .relations
            .get(name)
            .map(|r| r.iter().map(|t| (t[..half].to_vec(), t[half..].to_vec())).collect())
            .unwrap_or_default();
        if !check_wf_acyclic(&pairs) {
            return false;
        }
        if let Some(levels) = sol.levels.get(name) {
            let cap = g.tuples.len();
            for (from, to) in &pairs {
                match (levels.get(from), levels.get(to)) {
                    (Some(&a), Some(&b)) if a > b && a < cap => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Whether the directed graph given by `pairs` has no cycle (self-loops included).
pub fn check_wf_acyclic<T: Ord + Clone>(pairs: &[(T, T)]) -> bool {
    let mut succ: BTreeMap<&T, Vec<&T>> = BTreeMap::new();
    for (a, b) in pairs {
        succ.entry(a).or_default().push(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&T, u8> = BTreeMap::new();
    let starts: BTreeSet<&T> = succ.keys().copied().collect();
    for s in starts {
        if state.get(s).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(&T, usize)> = vec![(s, 0)];
        state.insert(s, 1);
        while let Some(&(n, i)) = stack.last() {
            let outs = succ.get(n).map(|v| v.as_slice()).unwrap_or(&[]);
            if i == outs.len() {
                state.insert(n, 2);
                stack.pop();
                continue;
            }
            stack.last_mut().unwrap().1 += 1;
            let m = outs[i];
            match state.get(m).copied().unwrap_or(0) {
                1 => return false,
                0 => {
                    state.insert(m, 1);
                    stack.push((m, 0));
                }
                _ => {}
            }
        }
    }
    true
}
