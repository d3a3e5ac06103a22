//! Exact linear arithmetic over the rationals: formulas, Fourier–Motzkin
//! quantifier elimination, and a decision procedure for the first-order
//! theory of `⟨Q; +, rational constants; =, <, ≤⟩`.
//!
//! Every quantifier is eliminated innermost-first on a disjunctive normal
//! form (`∀x φ` as `¬∃x ¬φ`); a closed formula then evaluates to a constant.

mod fm;
mod formula;
mod qe;

use std::collections::BTreeSet;

pub use formula::{eval, Formula, Valuation};

use crate::error::LinError;
use crate::syntax::{Constraint, Var};
use fm::Lit;
use qe::Qe;

/// Arbitrary-precision rational, always in lowest terms.
pub type Rational = num_rational::BigRational;

pub const DEFAULT_MAX_DNF: usize = 1_000_000;

/// Entry point to the decision procedure, carrying its resource ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Solver {
    /// Largest number of conjunctions a DNF may reach before the
    /// computation aborts with [`LinError::DnfLimit`].
    pub max_dnf: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            max_dnf: DEFAULT_MAX_DNF,
        }
    }
}

impl Solver {
    pub fn with_max_dnf(max_dnf: usize) -> Self {
        Solver { max_dnf }
    }

    fn qe(&self) -> Qe {
        Qe { limit: self.max_dnf }
    }

    /// Whether the universal closure of `f` holds over Q.
    pub fn decide(&self, f: &Formula) -> Result<bool, LinError> {
        // valid(f)  <=>  ¬f has no feasible disjunct
        let neg = self.qe().qe(&Formula::not(f.clone()))?;
        Ok(!neg.iter().any(|c| fm::feasible(c)))
    }

    /// Quantifier-free `g` with `g ≡ ∃vars f`.
    pub fn eliminate_exists(&self, vars: &[Var], f: &Formula) -> Result<Formula, LinError> {
        let d = self.qe().qe(&Formula::exists(vars.iter().cloned(), f.clone()))?;
        Ok(qe::to_formula(&d))
    }

    /// Whether `∃free(c). c` holds.
    pub fn satisfiable(&self, c: &Constraint) -> bool {
        match fm::normalize(c.conjuncts().iter().map(Lit::from_prop)) {
            Some(conj) => fm::feasible(&conj),
            None => false,
        }
    }

    /// Satisfiability of an arbitrary formula's existential closure.
    pub fn satisfiable_formula(&self, f: &Formula) -> Result<bool, LinError> {
        let d = self.qe().qe(f)?;
        Ok(d.iter().any(|c| fm::feasible(c)))
    }

    /// `∃̄_W c`: eliminates every variable of `c` outside `keep`.
    pub fn project(&self, c: &Constraint, keep: &BTreeSet<Var>) -> Formula {
        let drop: BTreeSet<Var> = c.vars().difference(keep).cloned().collect();
        let conj = fm::normalize(c.conjuncts().iter().map(Lit::from_prop))
            .and_then(|conj| fm::eliminate_vars(&conj, &drop));
        match conj {
            Some(conj) => qe::to_formula(&vec![conj]),
            None => Formula::False,
        }
    }

    /// Projection of a conjunction, kept in conjunction form; `None` when
    /// `c` is unsatisfiable.
    pub fn project_constraint(&self, c: &Constraint, keep: &BTreeSet<Var>) -> Option<Constraint> {
        self.project(c, keep).as_constraint()
    }

    /// A deterministic satisfying valuation for the free variables of `f`
    /// plus `extra`, or `None` when `f` is unsatisfiable.
    ///
    /// Variables are fixed in order by back-substitution; each takes the
    /// smallest-magnitude integer its interval admits (non-negative on ties),
    /// or the interval midpoint when no integer fits.
    pub fn sample_solution(&self, f: &Formula, extra: &[Var]) -> Result<Option<Valuation>, LinError> {
        let d = self.qe().qe(f)?;
        Ok(qe::sample(&d, f, extra))
    }
}

pub fn decide(f: &Formula) -> Result<bool, LinError> {
    Solver::default().decide(f)
}

pub fn eliminate_exists(vars: &[Var], f: &Formula) -> Result<Formula, LinError> {
    Solver::default().eliminate_exists(vars, f)
}

pub fn satisfiable(c: &Constraint) -> bool {
    Solver::default().satisfiable(c)
}

pub fn project(c: &Constraint, keep: &BTreeSet<Var>) -> Formula {
    Solver::default().project(c, keep)
}

pub fn sample_solution(f: &Formula, extra: &[Var]) -> Result<Option<Valuation>, LinError> {
    Solver::default().sample_solution(f, extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_query, AtomicProp, LinTerm, Rel};

    fn v(name: &str) -> Var {
        Var::new(name)
    }

    fn t(name: &str) -> LinTerm {
        LinTerm::var(v(name))
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn atom(lhs: LinTerm, rel: Rel, rhs: LinTerm) -> Formula {
        Formula::atom(AtomicProp::new(lhs, rel, rhs))
    }

    /// Constraint text parsed through the query front end.
    fn c(text: &str) -> Constraint {
        parse_query(&format!("dummy : {text}.")).unwrap().constraint
    }

    fn equivalent(a: &Formula, b: &Formula) -> bool {
        decide(&Formula::iff(a.clone(), b.clone())).unwrap()
    }

    fn example_41() -> Constraint {
        c("N >= 1, N = N1 + 1, T1 = 2*T, T >= 1")
    }

    #[test]
    fn fm_transitivity() {
        let f = Formula::and(vec![atom(t("X"), Rel::Le, t("Y")), atom(t("Y"), Rel::Le, t("Z"))]);
        let g = eliminate_exists(&[v("Y")], &f).unwrap();
        assert_eq!(g.to_string(), "X <= Z");
    }

    #[test]
    fn eliminating_a_defined_variable() {
        let f = Formula::from_constraint(&example_41());
        let g = eliminate_exists(&[v("T1")], &f).unwrap();
        let expected = Formula::from_constraint(&c("N >= 1, N = N1 + 1, T >= 1"));
        assert!(equivalent(&g, &expected));
        assert!(!g.free_vars().contains(&v("T1")));
    }

    #[test]
    fn projection_onto_head_and_body_positions() {
        let p = project(&example_41(), &[v("T")].into_iter().collect());
        assert!(equivalent(&p, &atom(t("T"), Rel::Ge, LinTerm::int(1))));
        assert_eq!(p.to_string(), "T >= 1");
        let p1 = project(&example_41(), &[v("T1")].into_iter().collect());
        assert!(equivalent(&p1, &atom(t("T1"), Rel::Ge, LinTerm::int(2))));
    }

    #[test]
    fn projection_extremes() {
        let cc = example_41();
        assert!(equivalent(&project(&cc, &cc.vars()), &Formula::from_constraint(&cc)));
        assert_eq!(project(&cc, &BTreeSet::new()), Formula::True);
    }

    #[test]
    fn dnlog1_of_running_example_holds() {
        // c -> forall T [T >= 1 -> exists T1 c]
        let cc = Formula::from_constraint(&example_41());
        let f = Formula::implies(
            cc.clone(),
            Formula::forall(
                [v("T")],
                Formula::implies(
                    atom(t("T"), Rel::Ge, LinTerm::int(1)),
                    Formula::exists([v("T1")], cc),
                ),
            ),
        );
        assert!(decide(&f).unwrap());
    }

    #[test]
    fn rationals_are_unbounded() {
        let f = Formula::forall(
            [v("X")],
            Formula::exists([v("Y")], atom(t("Y"), Rel::Gt, t("X"))),
        );
        assert!(decide(&f).unwrap());
    }

    #[test]
    fn interacting_arguments_block_dnlog1() {
        // c -> forall X1 exists Y1 c, with c = X1 <= X2, Y1 = X1 + 1, Y2 = X2
        let cc = Formula::from_constraint(&c("X1 <= X2, Y1 = X1 + 1, Y2 = X2"));
        let f = Formula::implies(
            cc.clone(),
            Formula::forall([v("X1")], Formula::exists([v("Y1")], cc)),
        );
        assert!(!decide(&f).unwrap());
    }

    #[test]
    fn satisfiability() {
        assert!(satisfiable(&c("A = 0, B = 1")));
        assert!(!satisfiable(&c("X < X")));
        assert!(satisfiable(&c("X1 >= X2, Y1 = X1 + 1, Y2 = X2")));
        assert!(satisfiable(&Constraint::truth()));
    }

    #[test]
    fn free_variables_are_universally_closed() {
        assert!(!decide(&atom(t("X"), Rel::Ge, LinTerm::int(0))).unwrap());
        assert!(decide(&Formula::or(vec![
            atom(t("X"), Rel::Ge, LinTerm::int(0)),
            atom(t("X"), Rel::Lt, LinTerm::int(0)),
        ]))
        .unwrap());
    }

    #[test]
    fn samples_follow_the_smallest_magnitude_rule() {
        let s = sample_solution(&Formula::True, &[v("Y")]).unwrap().unwrap();
        assert_eq!(s[&v("Y")], q(0));
        let s = sample_solution(&Formula::from_constraint(&c("Y >= -1")), &[]).unwrap().unwrap();
        assert_eq!(s[&v("Y")], q(0));
        let s = sample_solution(&Formula::from_constraint(&c("Y >= 1, Z >= 2")), &[])
            .unwrap()
            .unwrap();
        assert_eq!((s[&v("Y")].clone(), s[&v("Z")].clone()), (q(1), q(2)));
        let s = sample_solution(&Formula::from_constraint(&c("X > 1/3, X < 2/3")), &[])
            .unwrap()
            .unwrap();
        assert_eq!(s[&v("X")], Rational::new(1.into(), 2.into()));
        let s = sample_solution(&Formula::from_constraint(&c("X < -5/2")), &[]).unwrap().unwrap();
        assert_eq!(s[&v("X")], q(-3));
        assert!(sample_solution(&Formula::from_constraint(&c("X < X")), &[]).unwrap().is_none());
    }

    #[test]
    fn sample_satisfies_disjunction() {
        let f = Formula::or(vec![
            Formula::from_constraint(&c("X >= 3, X <= 2")),
            Formula::from_constraint(&c("X >= 4, Y = X + 1")),
        ]);
        let s = sample_solution(&f, &[]).unwrap().unwrap();
        assert!(eval(&f, &s).unwrap());
        assert_eq!(s[&v("X")], q(4));
    }

    #[test]
    fn dnf_ceiling_aborts() {
        let solver = Solver::with_max_dnf(4);
        // Product of three two-way disjunctions has eight disjuncts.
        let mk = |x: &str| {
            Formula::or(vec![
                atom(t(x), Rel::Le, LinTerm::int(0)),
                atom(t(x), Rel::Ge, LinTerm::int(5)),
            ])
        };
        let f = Formula::and(vec![mk("A"), mk("B"), mk("C")]);
        let err = solver.satisfiable_formula(&f).unwrap_err();
        assert!(err.is_resource_limit());
        assert!(Solver::default().satisfiable_formula(&f).unwrap());
    }
}
