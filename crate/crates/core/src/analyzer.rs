//! Looping-query inference for binary clause programs.
//!
//! For a recursive clause `p(X̃) ← c ◇ p(Ỹ)` every subset `m` of argument
//! positions is tried as a filter `τ(p) = m` with condition
//! `δ(p) = ⟨p|m(X̃|m) | ∃̄_{X̃|m} c⟩`. A subset passes when the filter is
//! neutral for the clause and `⟨p(Ỹ) | c⟩` is filter-more-general than
//! `⟨p(X̃) | c⟩`; the clause then has a looping query in the class of `m`,
//! and in the class of every subset of `m`. Each reported query is replayed
//! through the derivation engine before it is accepted.
//!
//! Loops then propagate backwards: if `⟨B | c⟩` is more general than a
//! known looping query, `⟨H | c⟩` loops too.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;

use crate::dnlog::check_dnlog;
use crate::engine::{run, run_clause, RunOptions};
use crate::error::LinError;
use crate::filters::{delta_more_general, more_general, select, Filter, PositionSet};
use crate::linarith::{Formula, Solver};
use crate::syntax::{Atom, Clause, LinTerm, Program, Query, Var};

pub type Positions = BTreeSet<usize>;

#[derive(Clone, Copy, Debug)]
pub struct AnalyzerOptions {
    pub solver: Solver,
    /// Derivation steps every witness must survive; 0 skips replay.
    pub verify_steps: usize,
    pub first_only: bool,
    pub propagate: bool,
    pub parallel: bool,
}

impl Default for AnalyzerOptions {
    fn default() -> Self {
        AnalyzerOptions {
            solver: Solver::default(),
            verify_steps: 100,
            first_only: false,
            propagate: true,
            parallel: true,
        }
    }
}

/// Why a subset of positions was rejected, or that it passed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    HeadConditionFailed,
    BodyConditionFailed,
    NotDeltaMoreGeneral,
    /// No candidate survived replay; holds the best step count reached.
    VerificationFailed(usize),
    ResourceLimit(LinError),
}

#[derive(Clone, Debug)]
pub struct Attempt {
    pub positions: Positions,
    pub outcome: Outcome,
}

#[derive(Clone, Debug)]
pub struct FilterResult {
    pub positions: Positions,
    /// `δ(p)` over the projected predicate.
    pub delta: Query,
    pub witness: Query,
    pub verified_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Looping,
    NoneFound,
    /// Head and body predicates differ; only propagation applies.
    NotRecursive,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Looping => "looping",
            Status::NoneFound => "none found",
            Status::NotRecursive => "not recursive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClauseReport {
    pub clause_index: usize,
    pub clause: Clause,
    pub attempts: Vec<Attempt>,
    pub passing: Vec<FilterResult>,
    pub classes: BTreeSet<Positions>,
    pub status: Status,
}

impl ClauseReport {
    pub fn resource_limited(&self) -> bool {
        self.attempts
            .iter()
            .any(|a| matches!(a.outcome, Outcome::ResourceLimit(_)))
    }

    pub fn attempt(&self, positions: &Positions) -> Option<&Attempt> {
        self.attempts.iter().find(|a| &a.positions == positions)
    }
}

#[derive(Clone, Debug)]
pub struct Propagated {
    pub clause_index: usize,
    pub head_query: Query,
    /// The known looping query that `⟨B | c⟩` generalizes.
    pub via: Query,
}

#[derive(Clone, Debug)]
pub struct ProgramReport {
    pub clauses: Vec<ClauseReport>,
    pub propagated: Vec<Propagated>,
    pub propagation_limited: bool,
}

impl ProgramReport {
    pub fn resource_limited(&self) -> bool {
        self.propagation_limited || self.clauses.iter().any(ClauseReport::resource_limited)
    }

    /// Every verified looping query with the clause that produced it.
    pub fn looping_queries(&self) -> Vec<(Query, usize)> {
        let mut out: Vec<(Query, usize)> = self
            .clauses
            .iter()
            .flat_map(|r| r.passing.iter().map(|f| (f.witness.clone(), r.clause_index)))
            .collect();
        out.extend(self.propagated.iter().map(|p| (p.head_query.clone(), p.clause_index)));
        out
    }
}

/// Subsets of `[1, n]`, largest first, lexicographic within a size.
pub fn subsets_by_size(n: usize) -> Vec<Positions> {
    (0..=n)
        .rev()
        .flat_map(|k| (1..=n).combinations(k).map(|c| c.into_iter().collect()))
        .collect()
}

/// `τ(p) = m` and `δ(p) = ⟨p|m(X̃|m) | ∃̄_{X̃|m} c⟩`.
pub fn candidate_filter(solver: &Solver, r: &Clause, m: &Positions) -> Filter {
    let p = r.head_pred();
    let xs = select(r.head_vars(), m);
    let keep: BTreeSet<Var> = xs.iter().cloned().collect();
    let cond = solver
        .project_constraint(r.constraint(), &keep)
        .expect("clause constraints are satisfiable");
    Filter::new(PositionSet::new().with(p.clone(), m.iter().copied()))
        .with_condition(p.clone(), Query::new(Atom::from_vars(p.projected(m), &xs), cond))
}

/// A concrete query for the class of `τ(p)`: head variables at the other
/// positions, sampled constants from `δ(p)` at the selected ones. Falls back
/// to `⟨p(X̃) | c⟩` when that candidate is not filter-more-general than it.
pub fn make_witness(solver: &Solver, filter: &Filter, r: &Clause) -> Result<Query, LinError> {
    let p = r.head_pred();
    let tau = filter.positions.get(p);
    let delta = filter.condition(p);
    let sample = solver
        .sample_solution(
            &Formula::from_constraint(&delta.constraint),
            &delta.atom.vars().into_iter().collect::<Vec<_>>(),
        )?
        .expect("filter conditions are satisfiable");
    // δ's atom arguments are the selected head variables, in order.
    let mut args: Vec<LinTerm> = r.head_vars().iter().cloned().map(LinTerm::var).collect();
    for (&i, t) in tau.iter().zip(&delta.atom.args) {
        let value = t.eval_with(|v| sample.get(v)).expect("sample covers δ");
        args[i - 1] = LinTerm::constant(value);
    }
    let rest: BTreeSet<Var> = select(r.head_vars(), &filter.positions.complement_of(p))
        .into_iter()
        .collect();
    let c = solver
        .project_constraint(r.constraint(), &rest)
        .expect("clause constraints are satisfiable");
    let candidate = Query::new(Atom::new(p.clone(), args), c);
    if delta_more_general(solver, &candidate, &r.head_query(), filter)? {
        Ok(candidate)
    } else {
        Ok(r.head_query())
    }
}

/// `{m′ | m′ ⊆ m, m ∈ passing}`.
pub fn class_closure<'a>(passing: impl IntoIterator<Item = &'a Positions>) -> BTreeSet<Positions> {
    let mut out = BTreeSet::new();
    for m in passing {
        let items: Vec<usize> = m.iter().copied().collect();
        for k in 0..=items.len() {
            for sub in items.iter().copied().combinations(k) {
                out.insert(sub.into_iter().collect());
            }
        }
    }
    out
}

fn verify(opts: &AnalyzerOptions, q: &Query, r: &Clause) -> Result<usize, LinError> {
    let run_opts = RunOptions {
        project_store: true,
        trace: false,
    };
    Ok(run_clause(&opts.solver, q, r, opts.verify_steps, run_opts)?.steps)
}

enum Trial {
    Pass(FilterResult),
    Fail(Outcome),
}

fn try_subset(opts: &AnalyzerOptions, r: &Clause, m: &Positions) -> Result<Trial, LinError> {
    let solver = &opts.solver;
    let filter = candidate_filter(solver, r, m);
    let verdict = check_dnlog(solver, &filter, r)?;
    if !verdict.head {
        return Ok(Trial::Fail(Outcome::HeadConditionFailed));
    }
    if !verdict.body {
        return Ok(Trial::Fail(Outcome::BodyConditionFailed));
    }
    let body = Query::new(Atom::from_vars(r.head_pred().clone(), r.body_vars()), r.constraint().clone());
    if !delta_more_general(solver, &body, &r.head_query(), &filter)? {
        return Ok(Trial::Fail(Outcome::NotDeltaMoreGeneral));
    }
    let delta = filter.condition(r.head_pred());
    let candidate = make_witness(solver, &filter, r)?;
    if opts.verify_steps == 0 {
        return Ok(Trial::Pass(FilterResult {
            positions: m.clone(),
            delta,
            witness: candidate,
            verified_steps: 0,
        }));
    }
    let mut best = 0;
    let mut tried = vec![candidate];
    if tried[0] != r.head_query() {
        tried.push(r.head_query());
    }
    for witness in tried {
        let steps = verify(opts, &witness, r)?;
        if steps >= opts.verify_steps {
            return Ok(Trial::Pass(FilterResult {
                positions: m.clone(),
                delta,
                witness,
                verified_steps: steps,
            }));
        }
        best = best.max(steps);
    }
    Ok(Trial::Fail(Outcome::VerificationFailed(best)))
}

pub fn find_looping_queries(opts: &AnalyzerOptions, r: &Clause, clause_index: usize) -> ClauseReport {
    let mut report = ClauseReport {
        clause_index,
        clause: r.clone(),
        attempts: Vec::new(),
        passing: Vec::new(),
        classes: BTreeSet::new(),
        status: Status::NotRecursive,
    };
    if !r.is_recursive() {
        return report;
    }
    for m in subsets_by_size(r.head_pred().arity()) {
        let outcome = match try_subset(opts, r, &m) {
            Ok(Trial::Pass(result)) => {
                report.passing.push(result);
                Outcome::Passed
            }
            Ok(Trial::Fail(outcome)) => outcome,
            Err(e) => Outcome::ResourceLimit(e),
        };
        let passed = outcome == Outcome::Passed;
        report.attempts.push(Attempt { positions: m, outcome });
        if passed && opts.first_only {
            break;
        }
    }
    report.classes = class_closure(report.passing.iter().map(|f| &f.positions));
    debug_assert!(report
        .classes
        .iter()
        .all(|m| class_closure([m]).is_subset(&report.classes)));
    report.status = if report.passing.is_empty() {
        Status::NoneFound
    } else {
        Status::Looping
    };
    report
}

/// Backward loop propagation to a fixpoint. Returns the newly proven head
/// queries and whether some inclusion test hit the resource ceiling.
pub fn propagate(solver: &Solver, program: &Program, base: &[(Query, usize)]) -> (Vec<Propagated>, bool) {
    let mut known: Vec<Query> = base.iter().map(|(q, _)| q.clone()).collect();
    let mut out = Vec::new();
    let mut limited = false;
    for _ in 0..=program.len() {
        let mut changed = false;
        for (i, r) in program.clauses().iter().enumerate() {
            let head = r.head_query();
            if known.contains(&head) {
                continue;
            }
            let body = r.body_query();
            let mut via = None;
            for l in known.iter().filter(|l| l.pred() == body.pred()) {
                match more_general(solver, &body, l) {
                    Ok(true) => {
                        via = Some(l.clone());
                        break;
                    }
                    Ok(false) => {}
                    Err(_) => limited = true,
                }
            }
            if let Some(via) = via {
                known.push(head.clone());
                out.push(Propagated {
                    clause_index: i,
                    head_query: head,
                    via,
                });
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (out, limited)
}

pub fn analyze_program(opts: &AnalyzerOptions, program: &Program) -> ProgramReport {
    let indexed: Vec<(usize, &Clause)> = program.clauses().iter().enumerate().collect();
    let clauses: Vec<ClauseReport> = if opts.parallel {
        indexed
            .par_iter()
            .map(|(i, r)| find_looping_queries(opts, r, *i))
            .collect()
    } else {
        indexed
            .iter()
            .map(|(i, r)| find_looping_queries(opts, r, *i))
            .collect()
    };
    let mut report = ProgramReport {
        clauses,
        propagated: Vec::new(),
        propagation_limited: false,
    };
    if opts.propagate {
        let base = report.looping_queries();
        let (propagated, limited) = propagate(&opts.solver, program, &base);
        report.propagated = propagated;
        report.propagation_limited = limited;
    }
    report
}

/// Whether `q` is covered by a proven looping query of the report: either
/// more general than one, or filter-more-general than a clause head under a
/// passing filter of that clause.
pub fn proves_looping(solver: &Solver, report: &ProgramReport, q: &Query) -> Result<Option<Query>, LinError> {
    for (l, _) in report.looping_queries() {
        if l.pred() == q.pred() && more_general(solver, q, &l)? {
            return Ok(Some(l));
        }
    }
    for cr in &report.clauses {
        let r = &cr.clause;
        if r.head_pred() != q.pred() {
            continue;
        }
        for f in &cr.passing {
            let filter = candidate_filter(solver, r, &f.positions);
            if delta_more_general(solver, q, &r.head_query(), &filter)? {
                return Ok(Some(r.head_query()));
            }
        }
    }
    Ok(None)
}

/// Replays `q` against the whole program.
pub fn replay(solver: &Solver, q: &Query, program: &Program, steps: usize, trace: bool) -> Result<crate::engine::DerivationState, LinError> {
    run(
        solver,
        q,
        program,
        steps,
        RunOptions {
            project_store: true,
            trace,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linarith::decide;
    use crate::syntax::{parse_program, parse_query};

    fn set(xs: &[usize]) -> Positions {
        xs.iter().copied().collect()
    }

    fn clause(text: &str) -> Clause {
        parse_program(text).unwrap().clauses()[0].clone()
    }

    fn opts() -> AnalyzerOptions {
        AnalyzerOptions {
            parallel: false,
            ..AnalyzerOptions::default()
        }
    }

    fn equivalent_constraint(q: &Query, text: &str) -> bool {
        let expected = parse_query(&format!("d : {text}")).unwrap().constraint;
        decide(&Formula::iff(
            Formula::from_constraint(&q.constraint),
            Formula::from_constraint(&expected),
        ))
        .unwrap()
    }

    const AT_LEAST: &str = "p(X1, X2) <- X1 >= X2, Y1 = X1 + 1, Y2 = X2 <> p(Y1, Y2).";
    const AT_MOST: &str = "p(X1, X2) <- X1 <= X2, Y1 = X1 + 1, Y2 = X2 <> p(Y1, Y2).";

    #[test]
    fn enumeration_order() {
        let order: Vec<Vec<usize>> = subsets_by_size(3)
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        assert_eq!(
            order,
            vec![
                vec![1, 2, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![1],
                vec![2],
                vec![3],
                vec![],
            ]
        );
    }

    #[test]
    fn candidate_conditions() {
        let s = Solver::default();
        let r = clause(AT_LEAST);
        let f = candidate_filter(&s, &r, &set(&[1, 2]));
        let d = f.condition(r.head_pred());
        assert_eq!(d.atom.to_string(), "p|{1,2}(X1, X2)");
        assert!(equivalent_constraint(&d, "X1 >= X2"));
        let empty = candidate_filter(&s, &r, &set(&[])).condition(r.head_pred());
        assert!(empty.constraint.is_true());
        let r2 = clause(AT_MOST);
        let one = candidate_filter(&s, &r2, &set(&[1])).condition(r2.head_pred());
        assert!(one.constraint.is_true());
    }

    #[test]
    fn full_selection_passes_when_first_stays_above() {
        let rep = find_looping_queries(&opts(), &clause(AT_LEAST), 0);
        assert_eq!(rep.status, Status::Looping);
        assert_eq!(rep.passing[0].positions, set(&[1, 2]));
        assert_eq!(rep.passing[0].witness.to_string(), "p(0, 0) : true");
        assert_eq!(rep.classes, class_closure([&set(&[1, 2])]));
        assert_eq!(rep.classes.len(), 4);
    }

    #[test]
    fn only_the_empty_selection_passes_below() {
        let rep = find_looping_queries(&opts(), &clause(AT_MOST), 0);
        let passing: Vec<&Positions> = rep.passing.iter().map(|f| &f.positions).collect();
        assert_eq!(passing, vec![&set(&[])]);
        assert_eq!(rep.attempt(&set(&[1, 2])).unwrap().outcome, Outcome::BodyConditionFailed);
        assert_eq!(rep.attempt(&set(&[1])).unwrap().outcome, Outcome::HeadConditionFailed);
        assert_eq!(rep.attempt(&set(&[2])).unwrap().outcome, Outcome::HeadConditionFailed);
        assert_eq!(rep.classes, [set(&[])].into_iter().collect());
    }

    #[test]
    fn fixed_successor_has_no_loop() {
        let rep = find_looping_queries(&opts(), &clause("p(A) <- A = 0, B = 1 <> p(B)."), 0);
        assert_eq!(rep.status, Status::NoneFound);
        assert!(rep.classes.is_empty());
        assert_eq!(rep.attempt(&set(&[1])).unwrap().outcome, Outcome::BodyConditionFailed);
        assert_eq!(rep.attempt(&set(&[])).unwrap().outcome, Outcome::NotDeltaMoreGeneral);
    }

    #[test]
    fn first_only_stops_early() {
        let o = AnalyzerOptions { first_only: true, ..opts() };
        let rep = find_looping_queries(&o, &clause(AT_LEAST), 0);
        assert_eq!(rep.passing.len(), 1);
        assert_eq!(rep.attempts.len(), 1);
    }

    #[test]
    fn witnesses_from_sampled_conditions() {
        let s = Solver::default();
        let r = clause("p(A, B) <- A = C + 1, C >= 0 <> p(C, D).");
        let w = make_witness(&s, &candidate_filter(&s, &r, &set(&[2])), &r).unwrap();
        assert_eq!(w.atom.to_string(), "p(A, 0)");
        assert!(equivalent_constraint(&w, "A >= 1"));
        let r = clause("pow2(A, B, C) <- A = D + 1, D >= 0, E = 2*B, B >= 1, F = C, C >= 2 <> pow2(D, E, F).");
        let w = make_witness(&s, &candidate_filter(&s, &r, &set(&[2, 3])), &r).unwrap();
        assert_eq!(w.atom.to_string(), "pow2(A, 1, 2)");
        assert!(equivalent_constraint(&w, "A >= 1"));
        let r = clause("p(A) <- A = B + 1, B >= 0 <> p(B).");
        let w = make_witness(&s, &candidate_filter(&s, &r, &set(&[])), &r).unwrap();
        assert_eq!(w.atom.to_string(), "p(A)");
        assert!(equivalent_constraint(&w, "A >= 1"));
    }

    #[test]
    fn closure_examples() {
        assert_eq!(class_closure([&set(&[1, 2])]).len(), 4);
        assert_eq!(class_closure([&set(&[])]), [set(&[])].into_iter().collect());
        assert!(class_closure(std::iter::empty::<&Positions>()).is_empty());
    }

    #[test]
    fn loops_propagate_to_callers() {
        let p = parse_program(
            "p(A) <- A >= 0, B >= 0 <> p(B).\n\
             q(Z) <- Z >= 0, W = Z <> p(W).\n\
             s(U) <- U = 1, V = 1 <> s(V).",
        )
        .unwrap();
        let rep = analyze_program(&opts(), &p);
        assert_eq!(rep.clauses[1].status, Status::NotRecursive);
        let q_head = p.clauses()[1].head_query();
        let prop = rep.propagated.iter().find(|x| x.clause_index == 1).expect("q propagated");
        assert_eq!(prop.head_query, q_head);
        let st = replay(&Solver::default(), &q_head, &p, 100, false).unwrap();
        assert_eq!(st.steps, 100);
    }

    #[test]
    fn propagation_without_base_is_empty_and_stable() {
        let p = parse_program("p(A) <- true <> p(B).").unwrap();
        let (none, _) = propagate(&Solver::default(), &p, &[]);
        assert!(none.is_empty());
        let head = p.clauses()[0].head_query();
        let (again, _) = propagate(&Solver::default(), &p, &[(head, 0)]);
        assert!(again.is_empty());
    }

    #[test]
    fn coverage_of_user_queries() {
        let s = Solver::default();
        let p = parse_program(AT_LEAST).unwrap();
        let rep = analyze_program(&opts(), &p);
        for text in ["p(0, 0) : true", "p(X, Y) : true"] {
            assert!(proves_looping(&s, &rep, &parse_query(text).unwrap()).unwrap().is_some(), "{text}");
        }
        let p = parse_program(AT_MOST).unwrap();
        let rep = analyze_program(&opts(), &p);
        assert!(proves_looping(&s, &rep, &parse_query("p(1, X) : true").unwrap()).unwrap().is_none());
    }
}
