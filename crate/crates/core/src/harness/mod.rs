//! End-to-end commands: parse, normalize, generate, ground, solve.

mod bench;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cegar::{refine_loop, CegarError, RefineBudget, RefineOutcome, TemplateRule};
use crate::formula::{check_closed, check_no_shadowing, negation_normal_form, parse_formula, Formula, FormulaError};
use crate::gen::{gen, GenError};
use crate::horn::{emit_chc, emit_textual, ground, HornError, NotExportable};
use crate::mc::{dump_verdict, mc, McError};
use crate::solver::{dump_solution, solve_ground, Budget, Outcome, Solution};
use crate::system::{is_total, parse_system, DomainBound, SystemError, TransitionSystem};

pub use bench::{cmd_bench, load_corpus, BenchOptions, BenchReport, BenchRow, CorpusEntry, Expected};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("system: {0}")]
    System(#[from] SystemError),
    #[error("formula: {0}")]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Horn(#[from] HornError),
    #[error(transparent)]
    Cegar(#[from] CegarError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error("the system has states without successors in {0}; negation needs a total system")]
    TotalityRequired(DomainBound),
    #[error(transparent)]
    NotExportable(#[from] NotExportable),
    #[error("corpus entry {entry}: {message}")]
    Corpus { entry: String, message: String },
}

pub fn read_file(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_system(path: &Path) -> Result<TransitionSystem, HarnessError> {
    Ok(parse_system(&read_file(path)?)?)
}

/// Parses a property and checks it is closed over the system's variables.
pub fn load_formula(ts: &TransitionSystem, text: &str) -> Result<Formula, HarnessError> {
    let f = parse_formula(text)?;
    check_closed(&f, &ts.vars)?;
    check_no_shadowing(&f, &ts.vars)?;
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Finite,
    Cegar,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Finite => "finite",
            Backend::Cegar => "cegar",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "finite" => Ok(Backend::Finite),
            "cegar" => Ok(Backend::Cegar),
            _ => Err(format!("unknown backend `{s}` (expected finite or cegar)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emit {
    Text,
    Chc,
}

impl FromStr for Emit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Emit::Text),
            "chc" => Ok(Emit::Chc),
            _ => Err(format!("unknown format `{s}` (expected text or chc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskVerdict {
    Proved,
    Disproved,
    Unknown(String),
}

impl fmt::Display for TaskVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskVerdict::Proved => f.write_str("proved"),
            TaskVerdict::Disproved => f.write_str("disproved"),
            TaskVerdict::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProveOptions {
    pub bound: Option<DomainBound>,
    pub backend: Backend,
    pub timeout: Option<Duration>,
    /// Skolem templates for the cegar backend; gaps use the default family.
    pub templates: Vec<TemplateRule>,
    /// Also run the explicit-state checker and record its answer.
    pub cross_check: bool,
    /// Write the solution dump here when one is found.
    pub dump: Option<PathBuf>,
}

pub const DEFAULT_BOUND: DomainBound = DomainBound { lo: -2, hi: 2 };

impl ProveOptions {
    pub fn bound(&self) -> DomainBound {
        self.bound.unwrap_or(DEFAULT_BOUND)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub task: &'static str,
    /// The formula handed to the generator, after normalization.
    pub formula: String,
    pub bound: DomainBound,
    pub backend: Backend,
    pub verdict: TaskVerdict,
    pub elapsed: Duration,
    pub horn_clauses: usize,
    /// Ground clause and atom counts (finite backend only).
    pub ground_clauses: Option<usize>,
    pub ground_atoms: Option<usize>,
    pub cegar_iterations: Option<usize>,
    /// Answer of the explicit-state checker for the same formula.
    pub oracle: Option<bool>,
    pub solution: Option<Solution>,
    pub dump_path: Option<PathBuf>,
    pub log: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            TaskVerdict::Proved => 0,
            TaskVerdict::Disproved => 1,
            TaskVerdict::Unknown(_) => 2,
        }
    }

    pub fn succeeded(&self) -> bool {
        !matches!(self.verdict, TaskVerdict::Unknown(_))
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {}\nformula: {}\nbound: {}\nbackend: {}\ntime: {:.3}s\nhorn clauses: {}\n",
            self.task,
            self.verdict,
            self.formula,
            self.bound,
            self.backend,
            self.elapsed.as_secs_f64(),
            self.horn_clauses
        );
        if let (Some(c), Some(a)) = (self.ground_clauses, self.ground_atoms) {
            out += &format!("ground: {c} clause(s), {a} atom(s)\n");
        }
        if let Some(i) = self.cegar_iterations {
            out += &format!("refinements: {i}\n");
        }
        if let Some(h) = self.oracle {
            let agree = h == (self.verdict == TaskVerdict::Proved || self.verdict == TaskVerdict::Disproved);
            out += &format!(
                "oracle: {} ({})\n",
                if h { "holds" } else { "fails" },
                if agree { "agrees" } else { "disagrees" }
            );
        }
        if let Some(p) = &self.dump_path {
            out += &format!("solution: {}\n", p.display());
        }
        out
    }
}

fn prepare(ts: &TransitionSystem, f: &Formula, b: DomainBound) -> Result<Formula, HarnessError> {
    check_closed(f, &ts.vars)?;
    check_no_shadowing(f, &ts.vars)?;
    if f.contains_negation() {
        if !is_total(ts, b) {
            return Err(HarnessError::TotalityRequired(b));
        }
        return Ok(negation_normal_form(f));
    }
    Ok(f.clone())
}

fn run(task: &'static str, ts: &TransitionSystem, f: &Formula, opts: &ProveOptions) -> Result<RunReport, HarnessError> {
    let start = Instant::now();
    let b = opts.bound();
    let f = prepare(ts, f, b)?;
    let hs = gen(ts, &f)?;
    let deadline = opts.timeout.map(|t| start + t);
    let mut report = RunReport {
        task,
        formula: f.to_string(),
        bound: b,
        backend: opts.backend,
        verdict: TaskVerdict::Unknown(String::new()),
        elapsed: Duration::ZERO,
        horn_clauses: hs.clauses.len(),
        ground_clauses: None,
        ground_atoms: None,
        cegar_iterations: None,
        oracle: None,
        solution: None,
        dump_path: None,
        log: Vec::new(),
    };
    let mut solution = None;
    report.verdict = match opts.backend {
        Backend::Finite => match ground(&hs, b) {
            Err(HornError::BoundTooLarge { atoms, ceiling }) => {
                TaskVerdict::Unknown(format!("budget: {atoms} ground atoms exceed the ceiling of {ceiling}"))
            }
            Err(e) => return Err(e.into()),
            Ok(gs) => {
                report.ground_clauses = Some(gs.clauses.len());
                report.ground_atoms = Some(gs.atoms.len());
                match solve_ground(&gs, Budget::with_deadline(deadline)) {
                    Outcome::Sat(s) => {
                        solution = Some(s);
                        TaskVerdict::Proved
                    }
                    Outcome::Unsat => TaskVerdict::Unknown("constraints unsatisfiable".into()),
                    Outcome::Unknown(why) => TaskVerdict::Unknown(why),
                }
            }
        },
        Backend::Cegar => {
            let budget = RefineBudget {
                solver: Budget::with_deadline(deadline),
                max_iterations: None,
            };
            match refine_loop(&hs, &opts.templates, true, b, budget) {
                Err(CegarError::Horn(HornError::BoundTooLarge { atoms, ceiling })) => {
                    TaskVerdict::Unknown(format!("budget: {atoms} ground atoms exceed the ceiling of {ceiling}"))
                }
                Err(e) => return Err(e.into()),
                Ok(rep) => {
                    report.cegar_iterations = Some(rep.iterations);
                    report.log = rep.log;
                    match rep.outcome {
                        RefineOutcome::Solved { solution: s, .. } => {
                            solution = Some(s);
                            TaskVerdict::Proved
                        }
                        RefineOutcome::Exhausted { full_cover: true } => {
                            TaskVerdict::Unknown("constraints unsatisfiable".into())
                        }
                        RefineOutcome::Exhausted { full_cover: false } => {
                            TaskVerdict::Unknown("template family exhausted".into())
                        }
                        RefineOutcome::Unknown(why) => TaskVerdict::Unknown(why),
                    }
                }
            }
        }
    };
    if opts.cross_check {
        report.oracle = Some(mc(ts, &f, b)?.holds);
    }
    if let (Some(path), Some(s)) = (&opts.dump, &solution) {
        std::fs::write(path, dump_solution(s)).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        report.dump_path = Some(path.clone());
    }
    report.solution = solution;
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Tries to establish `f` for all initial states within the bound.
pub fn cmd_prove(ts: &TransitionSystem, f: &Formula, opts: &ProveOptions) -> Result<RunReport, HarnessError> {
    run("prove", ts, f, opts)
}

/// Tries to establish the negation of `f`. Requires a total system.
pub fn cmd_disprove(ts: &TransitionSystem, f: &Formula, opts: &ProveOptions) -> Result<RunReport, HarnessError> {
    let b = opts.bound();
    if !is_total(ts, b) {
        return Err(HarnessError::TotalityRequired(b));
    }
    let mut rep = run("disprove", ts, &negation_normal_form(&Formula::not(f.clone())), opts)?;
    if rep.verdict == TaskVerdict::Proved {
        rep.verdict = TaskVerdict::Disproved;
    }
    Ok(rep)
}

/// Renders the Horn constraints for `f`.
pub fn cmd_gen(ts: &TransitionSystem, f: &Formula, emit: Emit) -> Result<String, HarnessError> {
    check_closed(f, &ts.vars)?;
    check_no_shadowing(f, &ts.vars)?;
    let hs = gen(ts, f)?;
    Ok(match emit {
        Emit::Text => emit_textual(&hs),
        Emit::Chc => emit_chc(&hs)?,
    })
}

/// Explicit-state check; returns whether `f` holds and a printable account.
pub fn cmd_mc(ts: &TransitionSystem, f: &Formula, b: DomainBound) -> Result<(bool, String), HarnessError> {
    let v = mc(ts, f, b)?;
    Ok((v.holds, dump_verdict(ts, &v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTER: &str = "vars v;\ninit v = 0;\nnext (v < 4 && v' = v + 1) || (v = 4 && v' = 4);\n";

    fn opts(lo: i64, hi: i64) -> ProveOptions {
        ProveOptions {
            bound: Some(DomainBound::new(lo, hi).unwrap()),
            cross_check: true,
            ..Default::default()
        }
    }

    #[test]
    fn counter_invariants() {
        let ts = parse_system(COUNTER).unwrap();
        let f = load_formula(&ts, "AG(v >= 0)").unwrap();
        let rep = cmd_prove(&ts, &f, &opts(0, 4)).unwrap();
        assert_eq!(rep.verdict, TaskVerdict::Proved);
        assert_eq!(rep.oracle, Some(true));
        assert_eq!(rep.exit_code(), 0);
        let f = load_formula(&ts, "AG(v <= 1)").unwrap();
        let rep = cmd_prove(&ts, &f, &opts(0, 4)).unwrap();
        assert_eq!(rep.verdict, TaskVerdict::Unknown("constraints unsatisfiable".into()));
        assert_eq!(rep.oracle, Some(false));
        assert_eq!(rep.exit_code(), 2);
        let rep = cmd_disprove(&ts, &f, &opts(0, 4)).unwrap();
        assert_eq!(rep.verdict, TaskVerdict::Disproved);
        assert_eq!(rep.exit_code(), 1);
    }

    #[test]
    fn cegar_backend_proves_counter_progress() {
        let ts = parse_system(COUNTER).unwrap();
        let f = load_formula(&ts, "AF(v = 4)").unwrap();
        let mut o = opts(0, 4);
        o.backend = Backend::Cegar;
        let rep = cmd_prove(&ts, &f, &o).unwrap();
        assert_eq!(rep.verdict, TaskVerdict::Proved, "{:?}", rep.log);
    }

    #[test]
    fn tautology_is_never_disproved() {
        let ts = parse_system(COUNTER).unwrap();
        let f = load_formula(&ts, "true").unwrap();
        let rep = cmd_disprove(&ts, &f, &opts(0, 4)).unwrap();
        assert!(!rep.succeeded());
    }

    #[test]
    fn non_total_system_cannot_be_disproved() {
        let ts = parse_system("vars v;\ninit v = 0;\nnext v' = v + 1;\n").unwrap();
        let f = load_formula(&ts, "AG(v >= 0)").unwrap();
        assert!(matches!(
            cmd_disprove(&ts, &f, &opts(0, 3)),
            Err(HarnessError::TotalityRequired(_))
        ));
    }

    #[test]
    fn open_formula_is_an_input_error() {
        let ts = parse_system(COUNTER).unwrap();
        assert!(load_formula(&ts, "AG(v >= q)").is_err());
        assert!(load_formula(&ts, "AG(v >= ").is_err());
    }

    #[test]
    fn chc_export_rejects_existential_heads() {
        let ts = parse_system(COUNTER).unwrap();
        let f = load_formula(&ts, "EF(v = 4)").unwrap();
        assert!(matches!(cmd_gen(&ts, &f, Emit::Chc), Err(HarnessError::NotExportable(_))));
        let f = load_formula(&ts, "AG(v >= 0)").unwrap();
        let chc = cmd_gen(&ts, &f, Emit::Chc).unwrap();
        assert!(chc.contains("(set-logic HORN)"));
    }
}
