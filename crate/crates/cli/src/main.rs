use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use ctlfo::cegar::parse_templates;
use ctlfo::harness::{
    cmd_bench, cmd_disprove, cmd_gen, cmd_mc, cmd_prove, load_formula, load_system, read_file, Backend, BenchOptions,
    Emit, HarnessError, ProveOptions, RunReport, DEFAULT_BOUND,
};
use ctlfo::system::DomainBound;

/// Exit codes: 0 proved or holds, 1 disproved or fails, 2 unknown, 3 input error.
#[derive(Parser)]
#[command(name = "ctlfo", version, about = "Verify CTL properties with first-order quantifiers over integer transition systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove that every initial state satisfies the formula.
    Prove(ProveArgs),
    /// Prove the negation of the formula (the system must be total in the bound).
    Disprove(ProveArgs),
    /// Print the Horn constraints generated for the formula.
    Gen(GenArgs),
    /// Decide the formula by explicit-state model checking.
    Mc(McArgs),
    /// Run prove and disprove over a corpus directory and compare with expectations.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Input {
    /// Transition system file.
    #[arg(long)]
    system: PathBuf,
    /// Property text.
    #[arg(long)]
    formula: String,
}

#[derive(Args)]
struct ProveArgs {
    #[command(flatten)]
    input: Input,
    /// Integer box for states and quantified data, as LO..HI.
    #[arg(long, default_value_t = DEFAULT_BOUND, allow_hyphen_values = true)]
    bound: DomainBound,
    #[arg(long, default_value = "finite")]
    backend: Backend,
    /// Give up after this many seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Skolem template file for the cegar backend.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Write the solution found to this file.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Also run the explicit-state checker and report whether it agrees.
    #[arg(long)]
    cross_check: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "text")]
    emit: Emit,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = DEFAULT_BOUND, allow_hyphen_values = true)]
    bound: DomainBound,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory with one subdirectory per task.
    #[arg(long, default_value = "corpus")]
    corpus: PathBuf,
    /// Override every task's bound.
    #[arg(long, allow_hyphen_values = true)]
    bound: Option<DomainBound>,
    #[arg(long, default_value = "finite")]
    backend: Backend,
    #[arg(long)]
    timeout: Option<f64>,
    /// Worker threads (0 uses all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn seconds(t: Option<f64>) -> Option<Duration> {
    t.map(Duration::from_secs_f64)
}

fn prove_options(a: &ProveArgs) -> Result<ProveOptions, HarnessError> {
    let templates = match &a.templates {
        Some(p) => parse_templates(&read_file(p)?).map_err(ctlfo::cegar::CegarError::from)?,
        None => Vec::new(),
    };
    Ok(ProveOptions {
        bound: Some(a.bound),
        backend: a.backend,
        timeout: seconds(a.timeout),
        templates,
        cross_check: a.cross_check,
        dump: a.dump.clone(),
    })
}

fn print_report(rep: &RunReport) {
    print!("{}", rep.summary());
    for line in &rep.log {
        println!("  {line}");
    }
}

fn run(cmd: Command) -> Result<u8, HarnessError> {
    match cmd {
        Command::Prove(a) => {
            let ts = load_system(&a.input.system)?;
            let f = load_formula(&ts, &a.input.formula)?;
            let rep = cmd_prove(&ts, &f, &prove_options(&a)?)?;
            print_report(&rep);
            Ok(rep.exit_code() as u8)
        }
        Command::Disprove(a) => {
            let ts = load_system(&a.input.system)?;
            let f = load_formula(&ts, &a.input.formula)?;
            let rep = cmd_disprove(&ts, &f, &prove_options(&a)?)?;
            print_report(&rep);
            Ok(rep.exit_code() as u8)
        }
        Command::Gen(a) => {
            let ts = load_system(&a.input.system)?;
            let f = load_formula(&ts, &a.input.formula)?;
            print!("{}", cmd_gen(&ts, &f, a.emit)?);
            Ok(0)
        }
        Command::Mc(a) => {
            let ts = load_system(&a.input.system)?;
            let f = load_formula(&ts, &a.input.formula)?;
            let (holds, text) = cmd_mc(&ts, &f, a.bound)?;
            print!("{text}");
            Ok(if holds { 0 } else { 1 })
        }
        Command::Bench(a) => {
            let opts = BenchOptions {
                bound: a.bound,
                backend: a.backend,
                timeout: seconds(a.timeout),
                jobs: a.jobs,
            };
            let rep = cmd_bench(&a.corpus, &opts)?;
            print!("{}", rep.table());
            let diff = rep.diff();
            for line in &diff {
                eprintln!("mismatch: {line}");
            }
            println!("{} task(s), {} mismatch(es)", rep.rows.len(), diff.len());
            Ok(rep.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
