//! Seeded generators for small clauses, queries and filters.

#![allow(dead_code)]

use std::collections::BTreeSet;

use dnloop_core::filters::{Filter, PositionSet};
use dnloop_core::linarith::{Rational, Solver};
use dnloop_core::syntax::{Atom, AtomicProp, Clause, Constraint, LinTerm, Pred, Query, Rel, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type Gen = ChaCha8Rng;

pub fn rng(seed: u64) -> Gen {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var(name: &str) -> Var {
    Var::new(name)
}

pub fn int(k: i64) -> Rational {
    Rational::from_integer(k.into())
}

const RELS: [Rel; 5] = [Rel::Eq, Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt];

/// `Σ a_i v_i rel k` over one or two of `vars`, coefficients in
/// `[-coef, coef]`, constant in `[-3, 3]`.
pub fn random_atom(g: &mut Gen, vars: &[Var], coef: i64) -> AtomicProp {
    let n = g.gen_range(1..=vars.len().min(2));
    let mut lhs = LinTerm::zero();
    for v in vars.choose_multiple(g, n) {
        lhs.add_coeff(v.clone(), int(g.gen_range(-coef..=coef)));
    }
    let rel = *RELS.choose(g).unwrap();
    // Equalities are rarer so that conjunctions stay satisfiable.
    let rel = if rel == Rel::Eq && g.gen_bool(0.5) { Rel::Le } else { rel };
    AtomicProp::new(lhs, rel, LinTerm::int(g.gen_range(-3..=3)))
}

pub fn random_constraint(g: &mut Gen, vars: &[Var], max_atoms: usize) -> Constraint {
    if vars.is_empty() {
        return Constraint::truth();
    }
    let n = g.gen_range(0..=max_atoms);
    Constraint((0..n).map(|_| random_atom(g, vars, 2)).collect())
}

fn vars(prefix: &str, n: usize) -> Vec<Var> {
    (1..=n).map(|i| var(&format!("{prefix}{i}"))).collect()
}

/// A satisfiable recursive clause over `p/arity`, optionally with one
/// local variable.
pub fn random_clause(g: &mut Gen, solver: &Solver, arity: usize) -> Clause {
    let p = Pred::new("p", arity);
    loop {
        let xs = vars("X", arity);
        let ys = vars("Y", arity);
        let mut all: Vec<Var> = xs.iter().chain(&ys).cloned().collect();
        if g.gen_bool(0.3) {
            all.push(var("Z"));
        }
        let c = random_constraint(g, &all, 3);
        if let Ok(r) = Clause::new_with(solver, p.clone(), xs, c, p.clone(), ys) {
            return r;
        }
    }
}

/// A query on `p/arity`: each argument is a variable `Ui` or a small
/// integer; the constraint ranges over the `Ui`.
pub fn random_query(g: &mut Gen, arity: usize) -> Query {
    let us = vars("U", arity);
    let args: Vec<LinTerm> = us
        .iter()
        .map(|u| {
            if g.gen_bool(0.3) {
                LinTerm::int(g.gen_range(-2..=2))
            } else {
                LinTerm::var(u.clone())
            }
        })
        .collect();
    let used: Vec<Var> = args.iter().filter_map(|t| t.as_var().cloned()).collect();
    let c = random_constraint(g, &used, 2);
    Query::new(Atom::new(Pred::new("p", arity), args), c)
}

/// A query describing a subset of `q`'s set: instantiate a variable or
/// add a conjunct.
pub fn specialize(g: &mut Gen, q: &Query) -> Query {
    let vs: Vec<Var> = q.vars().into_iter().collect();
    if vs.is_empty() {
        return q.clone();
    }
    if g.gen_bool(0.5) {
        let v = vs.choose(g).unwrap().clone();
        let k = LinTerm::int(g.gen_range(-2..=2));
        let mut sub = |t: &LinTerm| t.substitute(&v, &k);
        Query::new(
            Atom::new(q.pred().clone(), q.atom.args.iter().map(&mut sub).collect()),
            Constraint(q.constraint.conjuncts().iter().map(|a| a.substitute(&v, &k)).collect()),
        )
    } else {
        let mut c = q.constraint.clone();
        c.0.push(random_atom(g, &vs, 2));
        Query::new(q.atom.clone(), c)
    }
}

/// A filter on `p/arity` with a random position set and a satisfiable
/// random condition over the projected variables.
pub fn random_filter(g: &mut Gen, solver: &Solver, arity: usize) -> Filter {
    let p = Pred::new("p", arity);
    let tau: BTreeSet<usize> = (1..=arity).filter(|_| g.gen_bool(0.5)).collect();
    let proj = p.projected(&tau);
    let vs = vars("V", tau.len());
    let c = loop {
        let c = random_constraint(g, &vs, 2);
        if solver.satisfiable(&c) {
            break c;
        }
    };
    Filter::new(PositionSet::new().with(p.clone(), tau)).with_condition(p, Query::new(Atom::from_vars(proj, &vs), c))
}
