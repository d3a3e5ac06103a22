//! Position sets, filters, and set-inclusion tests between queries.
//!
//! Every inclusion test is reduced to a validity question: a tuple of values
//! `s̃` lies in `Set(Q)` exactly when `∃Var(Q′)(s̃ = t̃′ ∧ d′)` holds for a
//! variant `Q′ = ⟨p(t̃′) | d′⟩` of `Q` disjoint from `s̃`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::LinError;
use crate::linarith::{Formula, Solver};
use crate::syntax::{Atom, AtomicProp, Constraint, LinTerm, Pred, Query, Var};

/// Selected argument positions (1-based) per predicate; absent means `∅`.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct PositionSet {
    map: BTreeMap<Pred, BTreeSet<usize>>,
}

impl PositionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `τ(pred)`. Panics when an index lies outside `[1, arity]`.
    pub fn with(mut self, pred: Pred, positions: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = positions.into_iter().collect();
        assert!(
            set.iter().all(|&i| i >= 1 && i <= pred.arity()),
            "position out of range for {pred:?}: {set:?}"
        );
        self.map.insert(pred, set);
        self
    }

    pub fn get(&self, pred: &Pred) -> BTreeSet<usize> {
        self.map.get(pred).cloned().unwrap_or_default()
    }

    /// `τ̄(pred) = [1, arity] \ τ(pred)`.
    pub fn complement_of(&self, pred: &Pred) -> BTreeSet<usize> {
        let sel = self.get(pred);
        (1..=pred.arity()).filter(|i| !sel.contains(i)).collect()
    }

    pub fn complement(&self) -> PositionSet {
        PositionSet {
            map: self
                .map
                .keys()
                .map(|p| (p.clone(), self.complement_of(p)))
                .collect(),
        }
    }

    pub fn preds(&self) -> impl Iterator<Item = &Pred> {
        self.map.keys()
    }
}

/// `(τ, δ)`: positions plus, per predicate, a condition over `p|τ`.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Filter {
    pub positions: PositionSet,
    conditions: BTreeMap<Pred, Query>,
}

impl Filter {
    pub fn new(positions: PositionSet) -> Self {
        Filter {
            positions,
            conditions: BTreeMap::new(),
        }
    }

    /// Sets `δ(pred)`. The condition's predicate must be `pred|τ(pred)`.
    pub fn with_condition(mut self, pred: Pred, condition: Query) -> Self {
        assert_eq!(
            condition.pred(),
            &pred.projected(&self.positions.get(&pred)),
            "condition predicate does not match the projection"
        );
        self.conditions.insert(pred, condition);
        self
    }

    /// `δ(pred)`, defaulting to `⟨p|τ(X1, …, Xk) | true⟩`.
    pub fn condition(&self, pred: &Pred) -> Query {
        if let Some(q) = self.conditions.get(pred) {
            return q.clone();
        }
        let proj = pred.projected(&self.positions.get(pred));
        let vars: Vec<Var> = (1..=proj.arity()).map(|i| Var::new(format!("X{i}"))).collect();
        Query::new(Atom::from_vars(proj, &vars), Constraint::truth())
    }

    pub fn max_index(&self) -> u32 {
        self.conditions.values().map(Query::max_index).max().unwrap_or(0)
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in self.positions.preds() {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            let set: Vec<String> = self.positions.get(p).iter().map(usize::to_string).collect();
            write!(f, "{p}: {{{}}} {:?}", set.join(","), self.condition(p))?;
        }
        Ok(())
    }
}

/// `t̃|m`: the subsequence at the 1-based positions `m`, in ascending order.
pub fn select<T: Clone>(items: &[T], positions: &BTreeSet<usize>) -> Vec<T> {
    positions.iter().map(|&i| items[i - 1].clone()).collect()
}

/// `⟨p|τ(t̃|τ(p)) | d⟩`.
pub fn project_query(q: &Query, tau: &PositionSet) -> Query {
    let positions = tau.get(q.pred());
    Query::new(
        Atom::new(q.pred().projected(&positions), select(&q.atom.args, &positions)),
        q.constraint.clone(),
    )
}

/// `∃Var(Q′)(s̃ = t̃′ ∧ d′)` with `Q′` the variant of `q` at `generation`.
/// `generation` must exceed every index occurring in `s̃`.
pub fn sat_formula(s: &[LinTerm], q: &Query, generation: u32) -> Formula {
    assert_eq!(s.len(), q.atom.args.len(), "arity mismatch in sat");
    let variant = q.rename_apart(generation);
    let mut body: Vec<Formula> = s
        .iter()
        .zip(&variant.atom.args)
        .map(|(a, b)| Formula::atom(AtomicProp::eq(a.clone(), b.clone())))
        .collect();
    body.extend(variant.constraint.conjuncts().iter().cloned().map(Formula::atom));
    Formula::exists(variant.vars(), Formula::and(body))
}

/// A generation strictly above every index in the given queries.
fn fresh_generation<'a>(qs: impl IntoIterator<Item = &'a Query>) -> u32 {
    qs.into_iter().map(Query::max_index).max().unwrap_or(0) + 1
}

/// Whether `Set(q) ⊆ Set(general)`.
pub fn more_general(solver: &Solver, general: &Query, q: &Query) -> Result<bool, LinError> {
    if !solver.satisfiable(&q.constraint) {
        return Ok(true);
    }
    if general.pred() != q.pred() {
        return Ok(false);
    }
    let g = fresh_generation([general, q]);
    // Probe variables live one generation above the variants.
    let w: Vec<LinTerm> = (1..=q.pred().arity())
        .map(|i| LinTerm::var(Var::indexed(format!("W{i}"), g + 1)))
        .collect();
    let f = Formula::forall(
        w.iter().filter_map(|t| t.as_var().cloned()),
        Formula::implies(sat_formula(&w, q, g), sat_formula(&w, general, g)),
    );
    solver.decide(&f)
}

/// Whether `Set(q|τ) ⊆ Set(δ(p))`.
pub fn satisfies(solver: &Solver, q: &Query, filter: &Filter) -> Result<bool, LinError> {
    more_general(solver, &filter.condition(q.pred()), &project_query(q, &filter.positions))
}

/// `general|τ̄` is more general than `q|τ̄`, and `general` satisfies the filter.
pub fn delta_more_general(
    solver: &Solver,
    general: &Query,
    q: &Query,
    filter: &Filter,
) -> Result<bool, LinError> {
    if general.pred() != q.pred() {
        return Ok(false);
    }
    let rest = filter.positions.complement_of(q.pred());
    let co = PositionSet::new().with(q.pred().clone(), rest);
    Ok(more_general(solver, &project_query(general, &co), &project_query(q, &co))?
        && satisfies(solver, general, filter)?)
}
