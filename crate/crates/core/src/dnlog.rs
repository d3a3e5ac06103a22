//! The logical neutrality criterion for a filter and a clause
//! `p(X̃) ← c ◇ q(Ỹ)`:
//!
//! * head condition: `c → ∀X̃|τ(p) [sat(X̃|τ(p), δ(p)) → ∃𝒴 c]`
//! * body condition: `c → sat(Ỹ|τ(q), δ(q))`
//!
//! with `𝒴 = Ỹ|τ(q) ∪ local_vars(r)`.

use std::collections::BTreeSet;

use crate::error::LinError;
use crate::filters::{sat_formula, select, Filter};
use crate::linarith::{Formula, Solver};
use crate::syntax::{Clause, LinTerm, Var};

fn generation(filter: &Filter, r: &Clause) -> u32 {
    filter.max_index().max(r.max_index()) + 1
}

fn terms(vars: &[Var]) -> Vec<LinTerm> {
    vars.iter().cloned().map(LinTerm::var).collect()
}

fn head_distinguished(filter: &Filter, r: &Clause) -> Vec<Var> {
    select(r.head_vars(), &filter.positions.get(r.head_pred()))
}

fn body_distinguished(filter: &Filter, r: &Clause) -> Vec<Var> {
    select(r.body_vars(), &filter.positions.get(r.body_pred()))
}

/// The existentially bound block `Ỹ|τ(q) ∪ local_vars(r)`.
pub fn neutral_block(filter: &Filter, r: &Clause) -> BTreeSet<Var> {
    let mut ys: BTreeSet<Var> = body_distinguished(filter, r).into_iter().collect();
    ys.extend(r.local_vars());
    ys
}

pub fn dnlog1_formula(filter: &Filter, r: &Clause) -> Formula {
    let c = Formula::from_constraint(r.constraint());
    let xs = head_distinguished(filter, r);
    let cond = filter.condition(r.head_pred());
    Formula::implies(
        c.clone(),
        Formula::forall(
            xs.iter().cloned(),
            Formula::implies(
                sat_formula(&terms(&xs), &cond, generation(filter, r)),
                Formula::exists(neutral_block(filter, r), c),
            ),
        ),
    )
}

pub fn dnlog2_formula(filter: &Filter, r: &Clause) -> Formula {
    let c = Formula::from_constraint(r.constraint());
    let ys = body_distinguished(filter, r);
    let cond = filter.condition(r.body_pred());
    Formula::implies(c, sat_formula(&terms(&ys), &cond, generation(filter, r)))
}

/// Both conditions folded into one, which is strictly weaker and not a
/// sound neutrality criterion. Kept for regression tests only.
pub fn dnlog12_formula(filter: &Filter, r: &Clause) -> Formula {
    let c = Formula::from_constraint(r.constraint());
    let g = generation(filter, r);
    let xs = head_distinguished(filter, r);
    let ys = body_distinguished(filter, r);
    let body_sat = sat_formula(&terms(&ys), &filter.condition(r.body_pred()), g);
    Formula::implies(
        c.clone(),
        Formula::forall(
            xs.iter().cloned(),
            Formula::implies(
                sat_formula(&terms(&xs), &filter.condition(r.head_pred()), g),
                Formula::exists(neutral_block(filter, r), Formula::and(vec![c, body_sat])),
            ),
        ),
    )
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Verdict {
    pub head: bool,
    pub body: bool,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self.head && self.body
    }
}

pub fn check_dnlog(solver: &Solver, filter: &Filter, r: &Clause) -> Result<Verdict, LinError> {
    Ok(Verdict {
        head: solver.decide(&dnlog1_formula(filter, r))?,
        body: solver.decide(&dnlog2_formula(filter, r))?,
    })
}

pub fn is_dnlog(solver: &Solver, filter: &Filter, r: &Clause) -> Result<bool, LinError> {
    Ok(check_dnlog(solver, filter, r)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{satisfies, PositionSet};
    use crate::syntax::{parse_program, parse_query, Atom, Pred, Query};

    fn clause(text: &str) -> Clause {
        parse_program(text).unwrap().clauses()[0].clone()
    }

    fn filter(p: &Pred, positions: &[usize], cond: Option<(&[&str], &str)>) -> Filter {
        let set: BTreeSet<usize> = positions.iter().copied().collect();
        let f = Filter::new(PositionSet::new().with(p.clone(), set.clone()));
        match cond {
            None => f,
            Some((vars, c)) => {
                let vars: Vec<Var> = vars.iter().map(|v| Var::new(*v)).collect();
                let atom = Atom::from_vars(p.projected(&set), &vars);
                let c = parse_query(&format!("d : {c}")).unwrap().constraint;
                f.with_condition(p.clone(), Query::new(atom, c))
            }
        }
    }

    fn solver() -> Solver {
        Solver::default()
    }

    fn equivalent(a: &Formula, b: &Formula) -> bool {
        solver().decide(&Formula::iff(a.clone(), b.clone())).unwrap()
    }

    fn c_of(r: &Clause) -> Formula {
        Formula::from_constraint(r.constraint())
    }

    fn atom(text: &str) -> Formula {
        Formula::from_constraint(&parse_query(&format!("d : {text}")).unwrap().constraint)
    }

    fn running() -> Clause {
        clause("p(N, T) <- N >= 1, N = N1 + 1, T1 = 2*T, T >= 1 <> p(N1, T1).")
    }

    #[test]
    fn running_example_is_neutral() {
        let r = running();
        let f = filter(r.head_pred(), &[2], Some((&["X"], "X >= 1")));
        let c = c_of(&r);
        let expected1 = Formula::implies(
            c.clone(),
            Formula::forall(
                [Var::new("T")],
                Formula::implies(atom("T >= 1"), Formula::exists([Var::new("T1")], c.clone())),
            ),
        );
        assert!(equivalent(&dnlog1_formula(&f, &r), &expected1));
        assert!(equivalent(&dnlog2_formula(&f, &r), &Formula::implies(c, atom("T1 >= 1"))));
        assert!(is_dnlog(&solver(), &f, &r).unwrap());
    }

    #[test]
    fn empty_selection_reduces_to_local_projection() {
        let r = running();
        let f = filter(r.head_pred(), &[], None);
        let c = c_of(&r);
        let expected = Formula::implies(c.clone(), Formula::exists(r.local_vars(), c.clone()));
        assert!(equivalent(&dnlog1_formula(&f, &r), &expected));
        assert!(equivalent(&dnlog2_formula(&f, &r), &Formula::True));
        assert!(is_dnlog(&solver(), &f, &r).unwrap());
    }

    #[test]
    fn increasing_first_argument_below_second() {
        let r = clause("p(X1, X2) <- X1 <= X2, Y1 = X1 + 1, Y2 = X2 <> p(Y1, Y2).");
        let c = c_of(&r);
        let f2 = filter(r.head_pred(), &[2], Some((&["X2"], "true")));
        let expected = Formula::implies(
            c.clone(),
            Formula::forall([Var::new("X2")], Formula::exists([Var::new("Y2")], c.clone())),
        );
        assert!(equivalent(&dnlog1_formula(&f2, &r), &expected));
        let f12 = filter(r.head_pred(), &[1, 2], Some((&["X1", "X2"], "X1 <= X2")));
        assert!(equivalent(
            &dnlog2_formula(&f12, &r),
            &Formula::implies(c, atom("Y1 <= Y2"))
        ));
        let v = check_dnlog(&solver(), &f12, &r).unwrap();
        assert!(!v.body);
    }

    #[test]
    fn bounded_successor_is_not_neutral_but_merged_form_holds() {
        let r = clause("p(X) <- X <= 3, 2 <= Y <> p(Y).");
        let f = filter(r.head_pred(), &[1], Some((&["X"], "X <= 3")));
        assert!(!is_dnlog(&solver(), &f, &r).unwrap());
        assert!(!check_dnlog(&solver(), &f, &r).unwrap().body);
        assert!(solver().decide(&dnlog12_formula(&f, &r)).unwrap());
    }

    #[test]
    fn body_condition_matches_filter_satisfaction() {
        let r = running();
        for (pos, cond) in [(&[2][..], "X >= 1"), (&[2][..], "X >= 3"), (&[1][..], "X >= 1")] {
            let f = filter(r.head_pred(), pos, Some((&["X"], cond)));
            let direct = solver().decide(&dnlog2_formula(&f, &r)).unwrap();
            let body = Query::new(Atom::from_vars(r.head_pred().clone(), r.body_vars()), r.constraint().clone());
            assert_eq!(direct, satisfies(&solver(), &body, &f).unwrap(), "{pos:?} {cond}");
        }
    }
}
