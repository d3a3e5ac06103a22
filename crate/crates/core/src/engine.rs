//! Derivation steps and bounded derivations over constrained queries.
//!
//! A step from `⟨p(ũ) | d⟩` with a variant `p(s̃) ← c′ ◇ q(t̃)` of a clause
//! yields `⟨q(t̃) | s̃ = ũ ∧ c′ ∧ d⟩` whenever that store is satisfiable.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{EngineError, LinError};
use crate::linarith::Solver;
use crate::syntax::{Atom, Clause, Constraint, LinTerm, Program, Query};

/// One derivation step, or `None` when the combined store is unsatisfiable.
/// `generation` must exceed every index in `q`.
pub fn derivation_step(
    solver: &Solver,
    q: &Query,
    r: &Clause,
    generation: u32,
) -> Result<Option<Query>, EngineError> {
    if q.pred() != r.head_pred() {
        return Err(EngineError::PredicateMismatch {
            expected: format!("{:?}", r.head_pred()),
            found: format!("{:?}", q.pred()),
        });
    }
    debug_assert!(generation > q.max_index(), "generation {generation} is not fresh");
    let v = r.rename_apart(generation);
    let s: Vec<LinTerm> = v.head_vars().iter().cloned().map(LinTerm::var).collect();
    let store = Constraint::equalities(&s, &q.atom.args)
        .and(v.constraint())
        .and(&q.constraint);
    if !solver.satisfiable(&store) {
        return Ok(None);
    }
    Ok(Some(Query::new(v.body_atom(), store)))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Replace the store by its projection on the atom's variables after
    /// each step. The reachable set of ground atoms is unchanged.
    pub project_store: bool,
    pub trace: bool,
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub step: usize,
    /// 0-based position of the clause in the program.
    pub clause: usize,
    pub query: Query,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: clause {} ⊢ ⟨{} | {}⟩",
            self.step,
            self.clause + 1,
            self.query.atom,
            self.query.constraint
        )
    }
}

#[derive(Clone, Debug)]
pub struct DerivationState {
    pub current: Query,
    pub generation: u32,
    pub steps: usize,
    pub trace: Vec<TraceEntry>,
}

impl DerivationState {
    pub fn new(q: Query) -> Self {
        let generation = q.max_index() + 1;
        DerivationState {
            current: q,
            generation,
            steps: 0,
            trace: Vec::new(),
        }
    }
}

/// Applies the first applicable clause in program order until no clause
/// applies or `max_steps` steps were taken.
pub fn run(
    solver: &Solver,
    q: &Query,
    program: &Program,
    max_steps: usize,
    opts: RunOptions,
) -> Result<DerivationState, LinError> {
    let mut state = DerivationState::new(q.clone());
    while state.steps < max_steps {
        let mut next = None;
        for (i, r) in program.clauses().iter().enumerate() {
            if r.head_pred() != state.current.pred() {
                continue;
            }
            match derivation_step(solver, &state.current, r, state.generation) {
                Ok(Some(q1)) => {
                    next = Some((i, q1));
                    break;
                }
                Ok(None) => {}
                Err(EngineError::Solver(e)) => return Err(e),
                Err(EngineError::PredicateMismatch { .. }) => unreachable!("filtered above"),
            }
        }
        let Some((i, mut q1)) = next else { break };
        if opts.project_store {
            q1 = project_store(solver, &q1);
        }
        state.generation += 1;
        state.steps += 1;
        if opts.trace {
            state.trace.push(TraceEntry {
                step: state.steps,
                clause: i,
                query: q1.clone(),
            });
        }
        state.current = q1;
    }
    Ok(state)
}

fn project_store(solver: &Solver, q: &Query) -> Query {
    let keep: BTreeSet<_> = q.atom.vars();
    let c = solver
        .project_constraint(&q.constraint, &keep)
        .expect("store stays satisfiable");
    Query::new(q.atom.clone(), c)
}

/// Runs a query against a single clause.
pub fn run_clause(
    solver: &Solver,
    q: &Query,
    r: &Clause,
    max_steps: usize,
    opts: RunOptions,
) -> Result<DerivationState, LinError> {
    let program = Program::new(vec![r.clone()]).expect("a single clause is consistent");
    run(solver, q, &program, max_steps, opts)
}

/// `⟨A | true⟩`.
pub fn atom_query(atom: Atom) -> Query {
    Query::new(atom, Constraint::truth())
}
