use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dnloop_cli::{Report, EXIT_INPUT, EXIT_OK, EXIT_RESOURCE};
use dnloop_core::analyzer::{analyze_program, proves_looping, replay, AnalyzerOptions, ProgramReport};
use dnloop_core::engine::{run_clause, RunOptions};
use dnloop_core::linarith::{Solver, DEFAULT_MAX_DNF};
use dnloop_core::syntax::{parse_program_with, parse_query, Program};
use dnloop_core::{LinError, SyntaxError};

/// Proves non-termination of queries for binary CLP(Q) clauses.
#[derive(Parser)]
#[command(name = "dnloop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search every recursive clause for filters and looping queries.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Decide whether a query is proved to loop by the analysis.
    Check {
        file: PathBuf,
        /// Query in the form `p(t1, ..., tn) : constraints`.
        #[arg(long)]
        query: String,
        /// Also run the query through the engine for at most K steps.
        #[arg(long, value_name = "K")]
        run: Option<usize>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Emit JSON instead of a text table.
    #[arg(long)]
    json: bool,
    /// Stop each clause at its first passing filter.
    #[arg(long)]
    first_only: bool,
    /// Engine steps each witness must survive; 0 disables replay.
    #[arg(long, value_name = "K", default_value_t = 100)]
    verify_steps: usize,
    /// Print one line per engine step of every replay.
    #[arg(long)]
    trace: bool,
    /// Ceiling on DNF size during quantifier elimination.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_DNF)]
    max_dnf: usize,
    /// Do not propagate loops backwards through other clauses.
    #[arg(long)]
    no_propagate: bool,
}

impl Flags {
    fn options(&self) -> AnalyzerOptions {
        AnalyzerOptions {
            solver: Solver::with_max_dnf(self.max_dnf),
            verify_steps: self.verify_steps,
            first_only: self.first_only,
            propagate: !self.no_propagate,
            parallel: true,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze { file, flags } => analyze(&file, &flags),
        Command::Check { file, query, run, flags } => check(&file, &query, run, &flags),
    };
    ExitCode::from(code)
}

fn load(path: &Path, solver: &Solver) -> Result<Program, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_INPUT
    })?;
    parse_program_with(solver, &text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        match e {
            SyntaxError::Solver(l) if l.is_resource_limit() => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        }
    })
}

fn analyze(path: &Path, flags: &Flags) -> u8 {
    let opts = flags.options();
    let program = match load(path, &opts.solver) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let analysis = analyze_program(&opts, &program);
    let report = Report::from_analysis(&analysis);
    if flags.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    if flags.trace {
        print_witness_traces(&opts, &analysis, flags.json);
    }
    finish(&analysis)
}

fn print_witness_traces(opts: &AnalyzerOptions, analysis: &ProgramReport, to_stderr: bool) {
    let trace_opts = RunOptions {
        project_store: true,
        trace: true,
    };
    let mut lines = Vec::new();
    for cr in &analysis.clauses {
        for f in &cr.passing {
            lines.push(format!("trace of {} on clause {}:", f.witness, cr.clause_index + 1));
            match run_clause(&opts.solver, &f.witness, &cr.clause, opts.verify_steps, trace_opts) {
                Ok(st) => lines.extend(st.trace.iter().map(|e| format!("  {e}"))),
                Err(e) => lines.push(format!("  aborted: {e}")),
            }
        }
    }
    for l in lines {
        if to_stderr {
            eprintln!("{l}");
        } else {
            println!("{l}");
        }
    }
}

fn finish(analysis: &ProgramReport) -> u8 {
    if analysis.resource_limited() {
        eprintln!("error: analysis incomplete, quantifier elimination exceeded its size limit");
        EXIT_RESOURCE
    } else {
        EXIT_OK
    }
}

fn check(path: &Path, query: &str, run: Option<usize>, flags: &Flags) -> u8 {
    let opts = flags.options();
    let program = match load(path, &opts.solver) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let q = match parse_query(query) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("error: query: {e}");
            return EXIT_INPUT;
        }
    };
    match program.predicate(q.pred().name()) {
        Some(p) if p == q.pred() => {}
        Some(p) => {
            eprintln!("error: query uses {:?} but the program defines {:?}", q.pred(), p);
            return EXIT_INPUT;
        }
        None => {
            eprintln!("error: unknown predicate {}", q.pred().name());
            return EXIT_INPUT;
        }
    }
    let analysis = analyze_program(&opts, &program);
    let verdict = match proves_looping(&opts.solver, &analysis, &q) {
        Ok(v) => v,
        Err(e) => return resource_error(e),
    };
    let mut line = match &verdict {
        Some(via) => format!("LOOPS (proved) via {via}"),
        None => "UNKNOWN".to_string(),
    };
    let mut trace = Vec::new();
    let mut engine_steps = None;
    if let Some(k) = run {
        match replay(&opts.solver, &q, &program, k, flags.trace) {
            Ok(st) => {
                line.push_str(&format!("; engine ran {} of {k} steps", st.steps));
                engine_steps = Some(st.steps);
                trace = st.trace;
            }
            Err(e) => return resource_error(e),
        }
    }
    if flags.json {
        let value = serde_json::json!({
            "query": q.to_string(),
            "loops": verdict.is_some(),
            "via": verdict.as_ref().map(ToString::to_string),
            "engine_steps": engine_steps,
        });
        println!("{}", serde_json::to_string_pretty(&value).expect("plain data"));
    } else {
        println!("{line}");
    }
    for e in &trace {
        println!("{e}");
    }
    finish(&analysis)
}

fn resource_error(e: LinError) -> u8 {
    eprintln!("error: {e}");
    if e.is_resource_limit() {
        EXIT_RESOURCE
    } else {
        EXIT_INPUT
    }
}
