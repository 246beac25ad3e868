//! Satisfiability of ground Horn systems.
//!
//! Ground clauses are turned into propositional clauses (one selector
//! variable per multi-atom head disjunct) and decided by a conflict-driven
//! search with unit propagation over two watched literals. Rank atoms are
//! checked against the well-foundedness theory as they become true: a true
//! cycle is a conflict explained by the clause forbidding that cycle.

mod check;
mod dump;
mod levels;

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};
use std::time::Instant;

use crate::horn::GroundSystem;
use levels::Theory;

pub use check::{check_solution, check_wf_acyclic};
pub use dump::dump_solution;

/// Limits on a single search. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn with_deadline(deadline: Option<Instant>) -> Self {
        Budget {
            max_conflicts: None,
            deadline,
        }
    }
}

/// Finite interpretation of every predicate plus a level function per
/// well-founded predicate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    pub relations: BTreeMap<String, BTreeSet<Vec<i64>>>,
    pub levels: BTreeMap<String, BTreeMap<Vec<i64>, usize>>,
}

impl Solution {
    pub fn holds(&self, pred: &str, args: &[i64]) -> bool {
        self.relations.get(pred).is_some_and(|r| r.contains(args))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Sat(Solution),
    Unsat,
    Unknown(String),
}

impl Outcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, Outcome::Sat(_))
    }
}

/// Result of a search that also tracks which ground clauses were needed.
#[derive(Debug, Clone)]
pub struct Report {
    pub outcome: Outcome,
    /// On `Unsat`, indices into `GroundSystem::clauses` whose conjunction
    /// (together with the wf declarations) is already unsatisfiable.
    pub core: Option<Vec<usize>>,
    pub conflicts: u64,
    pub decisions: u64,
}

pub fn solve_ground(gs: &GroundSystem, budget: Budget) -> Outcome {
    Search::new(gs, false).run(budget).outcome
}

pub fn solve_ground_with_core(gs: &GroundSystem, budget: Budget) -> Report {
    Search::new(gs, true).run(budget)
}

type Lit = u32;

#[inline]
fn lit(var: u32, negated: bool) -> Lit {
    var * 2 + negated as u32
}

#[inline]
fn var_of(l: Lit) -> u32 {
    l >> 1
}

#[inline]
fn neg(l: Lit) -> Lit {
    l ^ 1
}

#[derive(Debug, Clone)]
enum Origin {
    Ground(usize),
    Theory,
    Learnt(Vec<u32>),
}

struct ClauseData {
    lits: Vec<Lit>,
    origin: Origin,
}

const UNDEF: u8 = 2;

struct Search<'a> {
    gs: &'a GroundSystem,
    track_core: bool,
    num_vars: usize,
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<u32>>,
    value: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    theory_head: usize,
    theory: Theory,
    activity: Vec<f64>,
    var_inc: f64,
    heap: BinaryHeap<(u64, std::cmp::Reverse<u32>)>,
    phase: Vec<bool>,
    seen: Vec<bool>,
    /// Set when the clause database is already contradictory at level 0.
    root_conflict: Option<u32>,
    conflicts: u64,
    decisions: u64,
}

impl<'a> Search<'a> {
    fn new(gs: &'a GroundSystem, track_core: bool) -> Self {
        let num_atoms = gs.atoms.len();
        let mut num_vars = num_atoms;
        let mut raw: Vec<(Vec<Lit>, usize)> = Vec::new();
        for (ci, c) in gs.clauses.iter().enumerate() {
            let mut main: Vec<Lit> = Vec::new();
            main.extend(c.pos.iter().map(|&a| lit(a as u32, true)));
            main.extend(c.neg.iter().map(|&a| lit(a as u32, false)));
            for d in &c.head {
                match d.len() {
                    0 => unreachable!("trivially true heads are dropped by grounding"),
                    1 => main.push(lit(d[0] as u32, false)),
                    _ => {
                        let s = num_vars as u32;
                        num_vars += 1;
                        main.push(lit(s, false));
                        for &a in d {
                            raw.push((vec![lit(s, true), lit(a as u32, false)], ci));
                        }
                    }
                }
            }
            raw.push((main, ci));
        }
        let theory = Theory::new(gs, num_vars);
        let mut s = Search {
            gs,
            track_core,
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            value: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            theory_head: 0,
            theory,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            heap: BinaryHeap::new(),
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            root_conflict: None,
            conflicts: 0,
            decisions: 0,
        };
        // Deterministic initial order: lower variable index first, which is
        // first occurrence in grounding order.
        for v in 0..num_vars as u32 {
            s.heap.push((0, std::cmp::Reverse(v)));
        }
        for (mut lits, ci) in raw {
            lits.sort_unstable();
            lits.dedup();
            if lits.windows(2).any(|w| w[0] == neg(w[1])) {
                continue;
            }
            s.add_input_clause(lits, Origin::Ground(ci));
        }
        s
    }

    fn lit_value(&self, l: Lit) -> u8 {
        let v = self.value[var_of(l) as usize];
        if v == UNDEF {
            UNDEF
        } else {
            v ^ (l & 1) as u8
        }
    }

    fn add_input_clause(&mut self, lits: Vec<Lit>, origin: Origin) {
        if self.root_conflict.is_some() {
            return;
        }
        let idx = self.clauses.len() as u32;
        match lits.len() {
            0 => {
                self.clauses.push(ClauseData { lits, origin });
                self.root_conflict = Some(idx);
            }
            1 => {
                let l = lits[0];
                self.clauses.push(ClauseData { lits, origin });
                match self.lit_value(l) {
                    1 => {}
                    0 => self.root_conflict = Some(idx),
                    _ => self.enqueue(l, Some(idx)),
                }
            }
            _ => {
                self.watches[lits[0] as usize].push(idx);
                self.watches[lits[1] as usize].push(idx);
                self.clauses.push(ClauseData { lits, origin });
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = var_of(l) as usize;
        self.value[v] = (l & 1 == 0) as u8;
        self.level[v] = self.trail_lim.len() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Unit propagation to fixpoint, then theory checks. Returns a conflicting clause.
    fn propagate(&mut self) -> Option<u32> {
        loop {
            while self.qhead < self.trail.len() {
                let p = self.trail[self.qhead];
                self.qhead += 1;
                let false_lit = neg(p);
                let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
                let mut i = 0;
                let mut conflict = None;
                while i < ws.len() {
                    let ci = ws[i];
                    let c = &mut self.clauses[ci as usize].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                    let first = c[0];
                    let first_val = {
                        let v = self.value[var_of(first) as usize];
                        if v == UNDEF { UNDEF } else { v ^ (first & 1) as u8 }
                    };
                    if first_val == 1 {
                        i += 1;
                        continue;
                    }
                    let mut moved = false;
                    for k in 2..c.len() {
                        let l = c[k];
                        let v = self.value[var_of(l) as usize];
                        let lv = if v == UNDEF { UNDEF } else { v ^ (l & 1) as u8 };
                        if lv != 0 {
                            c.swap(1, k);
                            self.watches[c[1] as usize].push(ci);
                            moved = true;
                            break;
                        }
                    }
                    if moved {
                        ws.swap_remove(i);
                        continue;
                    }
                    if first_val == 0 {
                        conflict = Some(ci);
                        break;
                    }
                    self.enqueue(first, Some(ci));
                    i += 1;
                }
                let restored = &mut self.watches[false_lit as usize];
                ws.append(restored);
                *restored = ws;
                if conflict.is_some() {
                    self.qhead = self.trail.len();
                    return conflict;
                }
            }
            match self.check_theory() {
                Some(c) => return Some(c),
                None => {
                    if self.qhead == self.trail.len() {
                        return None;
                    }
                }
            }
        }
    }

    fn check_theory(&mut self) -> Option<u32> {
        while self.theory_head < self.trail.len() {
            let l = self.trail[self.theory_head];
            self.theory_head += 1;
            if l & 1 == 1 {
                continue;
            }
            let v = var_of(l) as usize;
            let Some((g, e)) = self.theory.edge_of.get(v).copied().flatten() else {
                continue;
            };
            let value = &self.value;
            if let Some(cycle) = self.theory.cycle_through(g, e, |x| value[x as usize] == 1) {
                let mut lits: Vec<Lit> = cycle.iter().map(|&x| lit(x, true)).collect();
                lits.sort_unstable();
                lits.dedup();
                return Some(self.add_conflict_clause(lits, Origin::Theory));
            }
        }
        None
    }

    /// Adds a clause whose literals are all false, watching the two deepest.
    fn add_conflict_clause(&mut self, mut lits: Vec<Lit>, origin: Origin) -> u32 {
        lits.sort_by_key(|&l| std::cmp::Reverse(self.level[var_of(l) as usize]));
        let idx = self.clauses.len() as u32;
        if lits.len() >= 2 {
            self.watches[lits[0] as usize].push(idx);
            self.watches[lits[1] as usize].push(idx);
        }
        self.clauses.push(ClauseData { lits, origin });
        idx
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
            self.heap = (0..self.num_vars as u32)
                .map(|x| (self.activity[x as usize].to_bits(), std::cmp::Reverse(x)))
                .collect();
        }
        self.heap.push((self.activity[v].to_bits(), std::cmp::Reverse(v as u32)));
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first),
    /// the backjump level, and the clauses it was derived from.
    fn analyze(&mut self, confl: u32) -> (Vec<Lit>, u32, Vec<u32>) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut parents = Vec::new();
        let mut pending = 0usize;
        let mut idx = self.trail.len();
        let mut clause = confl;
        let mut p: Option<Lit> = None;
        let dl = self.decision_level();
        loop {
            if self.track_core {
                parents.push(clause);
            }
            let lits = self.clauses[clause as usize].lits.clone();
            for &q in &lits {
                if Some(q) == p {
                    continue;
                }
                let v = var_of(q) as usize;
                if self.seen[v] {
                    continue;
                }
                if self.level[v] == 0 {
                    if self.track_core {
                        if let Some(r) = self.reason[v] {
                            parents.push(r);
                        }
                    }
                    continue;
                }
                self.seen[v] = true;
                self.bump(v);
                if self.level[v] == dl {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if self.seen[var_of(self.trail[idx]) as usize] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[var_of(pl) as usize] = false;
            pending -= 1;
            if pending == 0 {
                learnt[0] = neg(pl);
                break;
            }
            clause = self.reason[var_of(pl) as usize].expect("implied literal has a reason");
        }
        for &l in &learnt[1..] {
            self.seen[var_of(l) as usize] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let (mut best, mut best_lv) = (1, 0);
            for (i, &l) in learnt.iter().enumerate().skip(1) {
                let lv = self.level[var_of(l) as usize];
                if lv > best_lv {
                    best = i;
                    best_lv = lv;
                }
            }
            learnt.swap(1, best);
            back = best_lv;
        }
        self.var_inc /= 0.95;
        (learnt, back, parents)
    }

    fn backtrack(&mut self, to: u32) {
        if self.decision_level() <= to {
            return;
        }
        let start = self.trail_lim[to as usize];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = var_of(l) as usize;
            self.phase[v] = l & 1 == 0;
            self.value[v] = UNDEF;
            self.reason[v] = None;
            self.heap.push((self.activity[v].to_bits(), std::cmp::Reverse(v as u32)));
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(to as usize);
        self.qhead = self.trail.len();
        self.theory_head = self.theory_head.min(self.trail.len());
    }

    fn pick_branch(&mut self) -> Option<u32> {
        while let Some((act, std::cmp::Reverse(v))) = self.heap.pop() {
            if self.value[v as usize] == UNDEF && act == self.activity[v as usize].to_bits() {
                return Some(v);
            }
        }
        None
    }

    fn out_of_budget(&self, budget: &Budget, clock: bool) -> Option<String> {
        if let Some(m) = budget.max_conflicts {
            if self.conflicts >= m {
                return Some(format!("conflict budget of {m} exhausted"));
            }
        }
        if !clock {
            return None;
        }
        if let Some(d) = budget.deadline {
            if Instant::now() >= d {
                return Some("timeout".into());
            }
        }
        None
    }

    fn run(mut self, budget: Budget) -> Report {
        if let Some(c) = self.root_conflict {
            return self.unsat(c);
        }
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    return self.unsat(confl);
                }
                let (learnt, back, parents) = self.analyze(confl);
                self.backtrack(back);
                let asserting = learnt[0];
                let idx = self.clauses.len() as u32;
                if learnt.len() >= 2 {
                    self.watches[learnt[0] as usize].push(idx);
                    self.watches[learnt[1] as usize].push(idx);
                }
                self.clauses.push(ClauseData {
                    lits: learnt,
                    origin: Origin::Learnt(parents),
                });
                self.enqueue(asserting, Some(idx));
                if let Some(why) = self.out_of_budget(&budget, self.conflicts.is_multiple_of(64)) {
                    return self.unknown(why);
                }
                continue;
            }
            if self.decisions.is_multiple_of(256) {
                if let Some(why) = self.out_of_budget(&budget, true) {
                    return self.unknown(why);
                }
            }
            match self.pick_branch() {
                None => return self.sat(),
                Some(v) => {
                    self.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    let l = lit(v, !self.phase[v as usize]);
                    self.enqueue(l, None);
                }
            }
        }
    }

    fn unknown(&self, why: String) -> Report {
        Report {
            outcome: Outcome::Unknown(why),
            core: None,
            conflicts: self.conflicts,
            decisions: self.decisions,
        }
    }

    fn unsat(&self, confl: u32) -> Report {
        let core = self.track_core.then(|| self.core_from(confl));
        Report {
            outcome: Outcome::Unsat,
            core,
            conflicts: self.conflicts,
            decisions: self.decisions,
        }
    }

    fn core_from(&self, confl: u32) -> Vec<usize> {
        let mut seen: HashSet<u32> = HashSet::new();
        let mut queue = vec![confl];
        let mut out = BTreeSet::new();
        while let Some(c) = queue.pop() {
            if !seen.insert(c) {
                continue;
            }
            let data = &self.clauses[c as usize];
            match &data.origin {
                Origin::Ground(g) => {
                    out.insert(*g);
                }
                Origin::Theory => {}
                Origin::Learnt(ps) => queue.extend(ps.iter().copied()),
            }
            for &l in &data.lits {
                let v = var_of(l) as usize;
                if self.value[v] != UNDEF && self.level[v] == 0 {
                    if let Some(r) = self.reason[v] {
                        if r != c {
                            queue.push(r);
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    fn sat(&self) -> Report {
        let gs = self.gs;
        let mut sol = Solution::default();
        for (name, _) in &gs.preds {
            sol.relations.insert(name.clone(), BTreeSet::new());
        }
        for (id, a) in gs.atoms.iter().enumerate() {
            if self.value[id] == 1 {
                sol.relations
                    .get_mut(&gs.preds[a.pred].0)
                    .unwrap()
                    .insert(a.args.clone());
            }
        }
        for (gi, g) in gs.wf.iter().enumerate() {
            let lv = self.theory.levels(gi, |x| self.value[x as usize] == 1);
            let table = g.tuples.iter().cloned().zip(lv).collect();
            sol.levels.insert(gs.preds[g.pred].0.clone(), table);
        }
        Report {
            outcome: Outcome::Sat(sol),
            core: None,
            conflicts: self.conflicts,
            decisions: self.decisions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::{ground, read_textual};
    use crate::system::DomainBound;

    fn solve_text(text: &str, lo: i64, hi: i64) -> (GroundSystem, Outcome) {
        let hs = read_textual(text).unwrap();
        let gs = ground(&hs, DomainBound::new(lo, hi).unwrap()).unwrap();
        let out = solve_ground(&gs, Budget::unlimited());
        (gs, out)
    }

    const RUNNING: &str = "x >= 0 => exists y. x >= y && rank(x, y)\nwf(rank)\n";

    #[test]
    fn running_example_needs_room_below_zero() {
        let (_, out) = solve_text(RUNNING, 0, 2);
        assert_eq!(out, Outcome::Unsat);
        let (gs, out) = solve_text(RUNNING, -1, 2);
        let Outcome::Sat(sol) = out else { panic!("expected sat") };
        assert!(check_solution(&gs, &sol));
        let rank = &sol.relations["rank"];
        for x in 0..=2 {
            assert!(rank.iter().any(|t| t[0] == x && t[1] <= x), "no witness for {x}");
        }
    }

    #[test]
    fn empty_system_is_sat() {
        let gs = GroundSystem::empty(DomainBound::new(0, 0).unwrap());
        assert_eq!(solve_ground(&gs, Budget::unlimited()), Outcome::Sat(Solution::default()));
    }

    #[test]
    fn direct_contradiction() {
        let (_, out) = solve_text("x = 0 => p(x)\np(x) && x = 0 => false\n", 0, 0);
        assert_eq!(out, Outcome::Unsat);
    }

    #[test]
    fn negated_premises() {
        let (gs, out) = solve_text("true => p(x) || q(x)\n!p(x) => false\nq(x) => false\n", 0, 1);
        let Outcome::Sat(sol) = out else { panic!() };
        assert!(check_solution(&gs, &sol));
        assert_eq!(sol.relations["p"].len(), 2);
    }

    #[test]
    fn core_covers_the_contradiction() {
        let hs = read_textual("true => r(x)\nx = 1 => q(x)\nr(x) && x = 0 => false\n").unwrap();
        let gs = ground(&hs, DomainBound::new(0, 1).unwrap()).unwrap();
        let rep = solve_ground_with_core(&gs, Budget::unlimited());
        assert_eq!(rep.outcome, Outcome::Unsat);
        let origins: BTreeSet<usize> = rep.core.unwrap().iter().map(|&i| gs.clauses[i].origin).collect();
        assert!(origins.contains(&0) && origins.contains(&2) && !origins.contains(&1));
    }

    #[test]
    fn cycles_are_rejected() {
        let (_, out) = solve_text("x = 0 => r(x, y) && y = 1\nx = 1 => r(x, y) && y = 0\nwf(r)\n", 0, 1);
        assert_eq!(out, Outcome::Unsat);
    }

    #[test]
    fn conflict_budget_yields_unknown() {
        // Pigeonhole: 4 pigeons into 3 holes needs many conflicts.
        let mut text = String::new();
        for p in 0..4 {
            text.push_str(&format!(
                "x = {p} && a = 0 && b = 1 && c = 2 => h(x, a) || h(x, b) || h(x, c)\n"
            ));
        }
        text.push_str("h(x, k) && h(y, k) && x < y => false\n");
        let hs = read_textual(&text).unwrap();
        let gs = ground(&hs, DomainBound::new(0, 3).unwrap()).unwrap();
        let budget = Budget {
            max_conflicts: Some(1),
            deadline: None,
        };
        assert!(matches!(solve_ground(&gs, budget), Outcome::Unknown(_)));
        assert_eq!(solve_ground(&gs, Budget::unlimited()), Outcome::Unsat);
    }
}
