//! Random ground systems and a brute-force reference evaluator.

use std::collections::{BTreeMap, BTreeSet};

use ctlfo::horn::GroundSystem;
use ctlfo::solver::Solution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::bound;

type Lit = (usize, Vec<i64>);

fn random_atom(r: &mut ChaCha8Rng) -> Lit {
    match r.gen_range(0..3) {
        0 => (0, vec![r.gen_range(0..4)]),
        1 => (1, vec![r.gen_range(0..4)]),
        _ => (2, vec![r.gen_range(0..3), r.gen_range(0..3)]),
    }
}

/// Unary `p` and `q` over 0..3 plus a well-founded binary `e` over 0..2.
pub fn random_ground(r: &mut ChaCha8Rng) -> GroundSystem {
    let preds = vec![("p".to_string(), 1), ("q".to_string(), 1), ("e".to_string(), 2)];
    let n = r.gen_range(2..=8);
    let clauses = (0..n)
        .map(|_| {
            let pos = (0..r.gen_range(0..=2)).map(|_| random_atom(r)).collect();
            let neg = (0..r.gen_range(0..=1)).map(|_| random_atom(r)).collect();
            let head = (0..r.gen_range(0..=2))
                .map(|_| (0..r.gen_range(1..=2)).map(|_| random_atom(r)).collect())
                .collect();
            (pos, neg, head)
        })
        .collect();
    GroundSystem::from_parts(bound(0, 3), preds, &[2], clauses)
}

/// Kahn's algorithm over explicit node pairs.
pub fn acyclic(nodes: usize, edges: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0usize; nodes];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    let mut ready: Vec<usize> = (0..nodes).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(n) = ready.pop() {
        seen += 1;
        for &(a, b) in edges {
            if a == n {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    seen == nodes
}

/// Whether the assignment (indexed by atom id) satisfies every clause and
/// leaves every well-founded relation acyclic.
pub fn is_model(gs: &GroundSystem, val: &[bool]) -> bool {
    let clauses_ok = gs.clauses.iter().all(|c| {
        let body = c.pos.iter().all(|&a| val[a]) && c.neg.iter().all(|&a| !val[a]);
        !body || c.head.iter().any(|d| d.iter().all(|&a| val[a]))
    });
    clauses_ok
        && gs.wf.iter().all(|g| {
            let edges: Vec<(usize, usize)> =
                g.edges.iter().filter(|e| val[e.0]).map(|&(_, a, b)| (a, b)).collect();
            acyclic(g.tuples.len(), &edges)
        })
}

/// Every model over the interned atoms, by enumeration.
pub fn models(gs: &GroundSystem) -> Vec<Vec<bool>> {
    let n = gs.atoms.len();
    assert!(n <= 20);
    (0u32..1 << n)
        .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|v| is_model(gs, v))
        .collect()
}

/// The atom values a solution assigns.
pub fn assignment(gs: &GroundSystem, sol: &Solution) -> Vec<bool> {
    gs.atoms
        .iter()
        .map(|a| sol.holds(&gs.preds[a.pred].0, &a.args))
        .collect()
}

/// A solution with the given atom values and no level tables.
pub fn to_solution(gs: &GroundSystem, val: &[bool]) -> Solution {
    let mut relations: BTreeMap<String, BTreeSet<Vec<i64>>> = BTreeMap::new();
    for (name, _) in &gs.preds {
        relations.insert(name.clone(), Default::default());
    }
    for (a, &on) in gs.atoms.iter().zip(val) {
        if on {
            relations.get_mut(&gs.preds[a.pred].0).unwrap().insert(a.args.clone());
        }
    }
    Solution {
        relations,
        levels: BTreeMap::new(),
    }
}
