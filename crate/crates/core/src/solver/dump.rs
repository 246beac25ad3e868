use std::fmt::Write;

use super::Solution;

fn tuple(t: &[i64]) -> String {
    let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Human-readable listing of a solution, one relation per block.
pub fn dump_solution(sol: &Solution) -> String {
    let mut out = String::new();
    for (name, rel) in &sol.relations {
        let _ = writeln!(out, "{name}: {} tuple(s)", rel.len());
        for t in rel {
            let _ = writeln!(out, "  {}", tuple(t));
        }
    }
    for (name, levels) in &sol.levels {
        let _ = writeln!(out, "levels of {name}:");
        for (t, l) in levels {
            let _ = writeln!(out, "  {} -> {l}", tuple(t));
        }
    }
    out
}
