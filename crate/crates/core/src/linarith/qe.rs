//! Quantifier elimination over disjunctive normal forms.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::fm::{self, Conj, Lit, Op};
use super::formula::{eval, Formula, Valuation};
use super::Rational;
use crate::error::LinError;
use crate::syntax::Var;

/// A disjunction of normalized conjunctions. `[]` is false, `[[]]` is true.
pub(crate) type Dnf = Vec<Conj>;

const ABSORPTION_CEILING: usize = 512;

pub(crate) struct Qe {
    pub limit: usize,
}

impl Qe {
    fn check(&self, n: usize) -> Result<(), LinError> {
        if n > self.limit {
            Err(LinError::DnfLimit { limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// Quantifier-free DNF equivalent to `f`.
    pub fn qe(&self, f: &Formula) -> Result<Dnf, LinError> {
        Ok(match f {
            Formula::True => vec![Vec::new()],
            Formula::False => Vec::new(),
            Formula::Atom(a) => fm::normalize([Lit::from_prop(a)]).into_iter().collect(),
            Formula::Not(g) => {
                let inner = self.qe(g)?;
                self.negate(&inner)?
            }
            Formula::And(gs) => {
                let mut acc: Dnf = vec![Vec::new()];
                for g in gs {
                    let next = self.qe(g)?;
                    acc = self.product(&acc, &next)?;
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            Formula::Or(gs) => {
                let mut acc = Vec::new();
                for g in gs {
                    acc.extend(self.qe(g)?);
                    self.check(acc.len())?;
                }
                simplify(acc)
            }
            Formula::Implies(a, b) => {
                let na = self.qe(a)?;
                let mut acc = self.negate(&na)?;
                acc.extend(self.qe(b)?);
                self.check(acc.len())?;
                simplify(acc)
            }
            Formula::Exists(vs, g) => {
                let inner = self.qe(g)?;
                exists(vs, &inner)
            }
            Formula::Forall(vs, g) => {
                let inner = self.qe(g)?;
                let neg = self.negate(&inner)?;
                let ex = exists(vs, &neg);
                self.negate(&ex)?
            }
        })
    }

    /// `¬(C1 ∨ … ∨ Cn)` as `(¬C1) ∧ … ∧ (¬Cn)`, each `¬Ci` a disjunction of
    /// negated literals.
    pub fn negate(&self, d: &Dnf) -> Result<Dnf, LinError> {
        let mut acc: Dnf = vec![Vec::new()];
        for conj in d {
            let factor: Dnf = conj
                .iter()
                .flat_map(Lit::negate)
                .filter_map(|l| fm::normalize([l]))
                .collect();
            acc = self.product(&acc, &factor)?;
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    /// Pairwise conjunction, dropping infeasible combinations as they arise.
    fn product(&self, a: &Dnf, b: &Dnf) -> Result<Dnf, LinError> {
        let mut out = Vec::new();
        for x in a {
            for y in b {
                if let Some(c) = fm::normalize(x.iter().chain(y).cloned()) {
                    if fm::feasible(&c) {
                        out.push(c);
                        self.check(out.len())?;
                    }
                }
            }
        }
        Ok(simplify(out))
    }
}

fn exists(vs: &[Var], d: &Dnf) -> Dnf {
    let vars: BTreeSet<Var> = vs.iter().cloned().collect();
    simplify(d.iter().filter_map(|c| fm::eliminate_vars(c, &vars)).collect())
}

/// Deduplicates and drops conjunctions subsumed by a weaker one.
fn simplify(mut d: Dnf) -> Dnf {
    d.sort();
    d.dedup();
    if d.iter().any(Vec::is_empty) {
        return vec![Vec::new()];
    }
    if d.len() > ABSORPTION_CEILING {
        return d;
    }
    // Shorter conjunctions first: only they can absorb longer ones.
    d.sort_by_key(Vec::len);
    let mut kept: Vec<Conj> = Vec::with_capacity(d.len());
    for c in d {
        let absorbed = kept.iter().any(|k| k.iter().all(|l| c.binary_search(l).is_ok()));
        if !absorbed {
            kept.push(c);
        }
    }
    kept.sort();
    kept
}

pub(crate) fn to_formula(d: &Dnf) -> Formula {
    fn conj_formula(c: &Conj) -> Formula {
        match c.as_slice() {
            [] => Formula::True,
            [l] => Formula::Atom(l.to_prop()),
            many => Formula::And(many.iter().map(|l| Formula::Atom(l.to_prop())).collect()),
        }
    }
    match d.as_slice() {
        [] => Formula::False,
        [c] => conj_formula(c),
        many => Formula::Or(many.iter().map(conj_formula).collect()),
    }
}

/// Smallest-magnitude integer in the interval, ties toward non-negative;
/// the midpoint when no integer fits.
fn pick_value(lits: &[Lit], x: &Var) -> Rational {
    let mut lo: Option<(Rational, bool)> = None;
    let mut hi: Option<(Rational, bool)> = None;
    for l in lits {
        let a = l.term.coeff(x);
        if a.is_zero() {
            continue;
        }
        let bound = -(l.term.constant_part() / &a);
        match l.op {
            Op::Eq => return bound,
            op => {
                let b = (bound, op == Op::Lt);
                if a > Rational::zero() {
                    if hi.as_ref().map_or(true, |h| b.0 < h.0 || (b.0 == h.0 && b.1)) {
                        hi = Some(b);
                    }
                } else if lo.as_ref().map_or(true, |l| b.0 > l.0 || (b.0 == l.0 && b.1)) {
                    lo = Some(b);
                }
            }
        }
    }
    let above_lo = |v: &Rational| lo.as_ref().map_or(true, |(l, s)| if *s { v > l } else { v >= l });
    let below_hi = |v: &Rational| hi.as_ref().map_or(true, |(h, s)| if *s { v < h } else { v <= h });
    let zero = Rational::zero();
    if above_lo(&zero) && below_hi(&zero) {
        return zero;
    }
    if let Some((l, strict)) = &lo {
        if *l >= zero {
            let c = if *strict {
                l.floor() + Rational::one()
            } else {
                l.ceil()
            };
            if below_hi(&c) {
                return c;
            }
        }
    }
    if let Some((h, strict)) = &hi {
        if *h <= zero {
            let c = if *strict {
                h.ceil() - Rational::one()
            } else {
                h.floor()
            };
            if above_lo(&c) {
                return c;
            }
        }
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => (l + h) / Rational::from_integer(2.into()),
        // An interval unbounded on one side always holds an integer.
        _ => unreachable!("unbounded interval without an integer"),
    }
}

/// A satisfying valuation of a feasible conjunction over `vars` (a superset
/// of its variables), chosen by back-substitution in variable order.
pub(crate) fn sample_conj(conj: &Conj, vars: &[Var]) -> Option<Valuation> {
    // projections[k] constrains vars[..k]
    let mut projections = vec![conj.clone()];
    for x in vars.iter().rev() {
        let last = projections.last().expect("non-empty");
        let next = if last.iter().any(|l| l.mentions(x)) {
            fm::eliminate_var(last, x)?
        } else {
            last.clone()
        };
        projections.push(next);
    }
    projections.reverse();
    let mut v = Valuation::new();
    for (i, x) in vars.iter().enumerate() {
        let mut lits: Vec<Lit> = projections[i + 1].clone();
        for (y, val) in &v {
            let t = crate::syntax::LinTerm::constant(val.clone());
            lits = lits
                .into_iter()
                .map(|l| Lit::new(l.term.substitute(y, &t), l.op))
                .collect();
        }
        let value = pick_value(&lits, x);
        v.insert(x.clone(), value);
    }
    Some(v)
}

pub(crate) fn sample(d: &Dnf, f: &Formula, extra: &[Var]) -> Option<Valuation> {
    let mut vars: BTreeSet<Var> = f.free_vars();
    vars.extend(extra.iter().cloned());
    let vars: Vec<Var> = vars.into_iter().collect();
    for conj in d {
        if let Some(v) = sample_conj(conj, &vars) {
            debug_assert!(eval(f, &v).unwrap_or(false), "sample violates {f}");
            return Some(v);
        }
    }
    None
}
