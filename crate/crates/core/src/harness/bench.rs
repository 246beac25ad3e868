//! Corpus runner: each task directory holds `system.ts`, `formula.txt` and
//! `expect.txt`. Every task is both proved and disproved; exactly one of the
//! two should succeed, and it should be the expected one.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use super::{cmd_disprove, cmd_prove, load_formula, read_file, Backend, HarnessError, ProveOptions, RunReport, DEFAULT_BOUND};
use crate::formula::Formula;
use crate::system::{parse_system, DomainBound, TransitionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Proved,
    Disproved,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub dir: PathBuf,
    pub system: TransitionSystem,
    pub formula_text: String,
    pub formula: Formula,
    pub expected: Expected,
    pub bound: Option<DomainBound>,
}

fn parse_expect(entry: &str, text: &str) -> Result<(Expected, Option<DomainBound>), HarnessError> {
    let bad = |message: String| HarnessError::Corpus {
        entry: entry.to_string(),
        message,
    };
    let mut verdict = None;
    let mut bound = None;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| bad(format!("expected `key value`, found `{line}`")))?;
        match (key, value.trim()) {
            ("verdict", "proved") => verdict = Some(Expected::Proved),
            ("verdict", "disproved") => verdict = Some(Expected::Disproved),
            ("bound", b) => bound = Some(b.parse().map_err(|e| bad(format!("{e}")))?),
            _ => return Err(bad(format!("unrecognized line `{line}`"))),
        }
    }
    let verdict = verdict.ok_or_else(|| bad("missing `verdict proved|disproved`".into()))?;
    Ok((verdict, bound))
}

/// Loads every subdirectory of `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, HarnessError> {
    let io = |source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut dirs = Vec::new();
    for e in std::fs::read_dir(dir).map_err(io)? {
        let e = e.map_err(io)?;
        if e.file_type().map_err(io)?.is_dir() {
            dirs.push(e.path());
        }
    }
    dirs.sort();
    dirs.into_iter()
        .map(|d| {
            let name = d.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let wrap = |e: HarnessError| HarnessError::Corpus {
                entry: name.clone(),
                message: e.to_string(),
            };
            let system = parse_system(&read_file(&d.join("system.ts"))?).map_err(|e| wrap(e.into()))?;
            let formula_text = read_file(&d.join("formula.txt"))?.trim().to_string();
            let formula = load_formula(&system, &formula_text).map_err(wrap)?;
            let (expected, bound) = parse_expect(&name, &read_file(&d.join("expect.txt"))?)?;
            Ok(CorpusEntry {
                name,
                dir: d,
                system,
                formula_text,
                formula,
                expected,
                bound,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    /// Overrides each entry's own bound.
    pub bound: Option<DomainBound>,
    pub backend: Backend,
    pub timeout: Option<Duration>,
    /// Worker threads; 0 picks the machine default.
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub name: String,
    pub formula: String,
    pub bound: DomainBound,
    pub expected: Expected,
    pub prove: Result<RunReport, String>,
    pub disprove: Result<RunReport, String>,
}

impl BenchRow {
    fn ok(r: &Result<RunReport, String>) -> bool {
        matches!(r, Ok(rep) if rep.succeeded())
    }

    pub fn proved(&self) -> bool {
        Self::ok(&self.prove)
    }

    pub fn disproved(&self) -> bool {
        Self::ok(&self.disprove)
    }

    /// Exactly one direction succeeded, and it is the expected one.
    pub fn passed(&self) -> bool {
        match self.expected {
            Expected::Proved => self.proved() && !self.disproved(),
            Expected::Disproved => self.disproved() && !self.proved(),
        }
    }

    fn problem(&self) -> Option<String> {
        if self.passed() {
            return None;
        }
        let describe = |r: &Result<RunReport, String>| match r {
            Ok(rep) => rep.verdict.to_string(),
            Err(e) => format!("error: {e}"),
        };
        Some(format!(
            "{}: expected {}, prove -> {}, disprove -> {}",
            self.name,
            match self.expected {
                Expected::Proved => "proved",
                Expected::Disproved => "disproved",
            },
            describe(&self.prove),
            describe(&self.disprove)
        ))
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(BenchRow::passed)
    }

    /// One line per failed expectation.
    pub fn diff(&self) -> Vec<String> {
        self.rows.iter().filter_map(BenchRow::problem).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    /// Fixed-width table: task, property, then result and time for each direction.
    pub fn table(&self) -> String {
        let cell = |r: &Result<RunReport, String>| match r {
            Ok(rep) => format!(
                "{} {:>8.3}",
                if rep.succeeded() { "✓" } else { "✗" },
                rep.elapsed.as_secs_f64()
            ),
            Err(_) => format!("! {:>8}", "error"),
        };
        let fw = self.rows.iter().map(|r| r.formula.chars().count()).max().unwrap_or(0).max(8);
        let nw = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(4);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<nw$}  {:<fw$}  {:<7}  {:<10}  {:<10}  status",
            "task", "property", "bound", "prove", "disprove"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<nw$}  {:<fw$}  {:<7}  {:<10}  {:<10}  {}",
                r.name,
                r.formula,
                r.bound.to_string(),
                cell(&r.prove),
                cell(&r.disprove),
                if r.passed() { "ok" } else { "FAIL" }
            );
        }
        out
    }
}

pub fn run_entry(e: &CorpusEntry, opts: &BenchOptions) -> BenchRow {
    let bound = opts.bound.or(e.bound).unwrap_or(DEFAULT_BOUND);
    let po = ProveOptions {
        bound: Some(bound),
        backend: opts.backend,
        timeout: opts.timeout,
        ..Default::default()
    };
    BenchRow {
        name: e.name.clone(),
        formula: e.formula_text.clone(),
        bound,
        expected: e.expected,
        prove: cmd_prove(&e.system, &e.formula, &po).map_err(|x| x.to_string()),
        disprove: cmd_disprove(&e.system, &e.formula, &po).map_err(|x| x.to_string()),
    }
}

/// Runs every entry of the corpus on a bounded pool; rows follow entry order.
pub fn cmd_bench(dir: &Path, opts: &BenchOptions) -> Result<BenchReport, HarnessError> {
    let entries = load_corpus(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .expect("thread pool");
    let rows = pool.install(|| entries.par_iter().map(|e| run_entry(e, opts)).collect());
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expect_file_format() {
        assert_eq!(
            parse_expect("t", "# generated\nverdict proved\nbound -1..3\n").unwrap(),
            (Expected::Proved, Some(DomainBound::new(-1, 3).unwrap()))
        );
        assert_eq!(parse_expect("t", "verdict disproved").unwrap(), (Expected::Disproved, None));
        assert!(parse_expect("t", "bound 0..1").is_err());
        assert!(parse_expect("t", "verdict maybe").is_err());
    }

    #[test]
    fn empty_corpus_gives_empty_table() {
        let dir = tempfile::tempdir().unwrap();
        let rep = cmd_bench(dir.path(), &BenchOptions::default()).unwrap();
        assert!(rep.rows.is_empty());
        assert_eq!(rep.exit_code(), 0);
    }
}
