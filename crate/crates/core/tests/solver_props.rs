mod common;

use common::ground::{acyclic, assignment, is_model, models, random_ground, to_solution};
use common::{bound, rng};
use ctlfo::horn::GroundSystem;
use ctlfo::solver::{check_solution, check_wf_acyclic, solve_ground, Budget, Outcome};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn agrees_with_enumeration_on_small_systems() {
    let mut sat = 0;
    let mut tried = 0;
    for seed in 0..600 {
        let mut r = rng(seed);
        let gs = random_ground(&mut r);
        if gs.atoms.len() > 14 {
            continue;
        }
        tried += 1;
        let expected = !models(&gs).is_empty();
        match solve_ground(&gs, Budget::unlimited()) {
            Outcome::Sat(sol) => {
                assert!(expected, "seed {seed}: no model exists");
                assert!(check_solution(&gs, &sol), "seed {seed}");
                assert!(is_model(&gs, &assignment(&gs, &sol)), "seed {seed}");
                sat += 1;
            }
            Outcome::Unsat => assert!(!expected, "seed {seed}: a model exists"),
            Outcome::Unknown(why) => panic!("seed {seed}: {why}"),
        }
    }
    assert!(tried > 300);
    assert!(sat > 50 && sat < tried - 50, "sat {sat} of {tried}");
}

/// Systems with exactly one model; any single flip of that model is not a model.
#[test]
fn flipped_atoms_are_rejected() {
    let mut trials = 0;
    let mut seed = 10_000;
    while trials < 500 {
        seed += 1;
        let mut r = rng(seed);
        let gs = random_ground(&mut r);
        if gs.atoms.is_empty() || gs.atoms.len() > 10 || models(&gs).len() != 1 {
            continue;
        }
        let Outcome::Sat(sol) = solve_ground(&gs, Budget::unlimited()) else {
            panic!("seed {seed}: unique model missed");
        };
        let mut val = assignment(&gs, &sol);
        assert!(check_solution(&gs, &to_solution(&gs, &val)));
        let i = r.gen_range(0..val.len());
        val[i] = !val[i];
        assert!(!check_solution(&gs, &to_solution(&gs, &val)), "seed {seed}: flip of atom {i} accepted");
        trials += 1;
    }
}

fn digraph(nodes: usize, edges: &[(usize, usize)]) -> GroundSystem {
    let preds = vec![("e".to_string(), 2)];
    let clauses = edges
        .iter()
        .map(|&(a, b)| (vec![], vec![], vec![vec![(0, vec![a as i64, b as i64])]]))
        .collect();
    GroundSystem::from_parts(bound(0, nodes as i64 - 1), preds, &[0], clauses)
}

#[test]
fn level_encoding_matches_cycle_detection() {
    let mut cyclic = 0;
    for seed in 0..1000 {
        let mut r = rng(seed);
        let nodes = r.gen_range(1..=8);
        let density = r.gen_range(0.05..0.35);
        let mut edges = Vec::new();
        for a in 0..nodes {
            for b in 0..nodes {
                if r.gen_bool(density) {
                    edges.push((a, b));
                }
            }
        }
        let expected = acyclic(nodes, &edges);
        cyclic += usize::from(!expected);
        let gs = digraph(nodes, &edges);
        let out = solve_ground(&gs, Budget::unlimited());
        assert_eq!(out.is_sat(), expected, "seed {seed}: {edges:?}");
        if let Outcome::Sat(sol) = out {
            assert!(check_solution(&gs, &sol));
            assert!(sol.levels.contains_key("e") || edges.is_empty());
        }
    }
    assert!(cyclic > 200 && cyclic < 800, "{cyclic}");
}

proptest! {
    #[test]
    fn acyclicity_checks_agree(nodes in 1usize..9, raw in prop::collection::vec((0usize..8, 0usize..8), 0..20)) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % nodes, b % nodes)).collect();
        prop_assert_eq!(check_wf_acyclic(&edges), acyclic(nodes, &edges));
    }

    #[test]
    fn sat_answers_are_models(seed in 0u64..100_000) {
        let gs = random_ground(&mut rng(seed));
        if let Outcome::Sat(sol) = solve_ground(&gs, Budget::unlimited()) {
            prop_assert!(check_solution(&gs, &sol));
            prop_assert!(is_model(&gs, &assignment(&gs, &sol)));
        }
    }

    #[test]
    fn adding_a_fact_never_helps(seed in 0u64..100_000, pick in 0usize..64) {
        // A superset of clauses has no more models.
        let mut r = rng(seed);
        let gs = random_ground(&mut r);
        prop_assume!(!gs.atoms.is_empty());
        let before = solve_ground(&gs, Budget::unlimited()).is_sat();
        let mut val_fact = gs.clone();
        let atom = pick % gs.atoms.len();
        val_fact.clauses.push(ctlfo::horn::GroundClause {
            origin: gs.clauses.len(),
            binding: vec![],
            pos: vec![],
            neg: vec![],
            head: vec![vec![atom]],
        });
        let after = solve_ground(&val_fact, Budget::unlimited()).is_sat();
        prop_assert!(before || !after);
    }
}
