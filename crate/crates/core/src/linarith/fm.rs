//! Normalized literals and Fourier–Motzkin elimination over conjunctions.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::linarith::Rational;
use crate::syntax::{AtomicProp, LinTerm, Rel, Var};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) enum Op {
    Eq,
    Le,
    Lt,
}

impl Op {
    fn rel(self) -> Rel {
        match self {
            Op::Eq => Rel::Eq,
            Op::Le => Rel::Le,
            Op::Lt => Rel::Lt,
        }
    }
}

/// `term op 0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) struct Lit {
    pub term: LinTerm,
    pub op: Op,
}

impl Lit {
    pub fn new(term: LinTerm, op: Op) -> Self {
        Lit { term, op }
    }

    pub fn from_prop(a: &AtomicProp) -> Lit {
        let (term, rel) = a.canonical();
        let op = match rel {
            Rel::Eq => Op::Eq,
            Rel::Le => Op::Le,
            Rel::Lt => Op::Lt,
            Rel::Ge | Rel::Gt => unreachable!("canonical() only yields =, <=, <"),
        };
        Lit { term, op }
    }

    pub fn to_prop(&self) -> AtomicProp {
        AtomicProp::from_canonical(&self.term, self.op.rel())
    }

    /// The negation as a disjunction of literals.
    pub fn negate(&self) -> Vec<Lit> {
        let neg = self.term.neg();
        match self.op {
            // t != 0  <=>  t < 0 or -t < 0
            Op::Eq => vec![Lit::new(self.term.clone(), Op::Lt), Lit::new(neg, Op::Lt)],
            Op::Le => vec![Lit::new(neg, Op::Lt)],
            Op::Lt => vec![Lit::new(neg, Op::Le)],
        }
    }

    pub fn holds_constant(&self) -> Option<bool> {
        if !self.term.is_constant() {
            return None;
        }
        let k = self.term.constant_part();
        Some(match self.op {
            Op::Eq => k.is_zero(),
            Op::Le => !k.is_positive(),
            Op::Lt => k.is_negative(),
        })
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.term.coeffs().contains_key(v)
    }
}

/// A conjunction of literals in normal form (see [`normalize`]).
pub(crate) type Conj = Vec<Lit>;

#[derive(Default)]
struct Bounds {
    eq: Option<Rational>,
    lo: Option<(Rational, bool)>,
    hi: Option<(Rational, bool)>,
}

fn tighter_lo(a: &(Rational, bool), b: &(Rational, bool)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 && !b.1)
}

fn tighter_hi(a: &(Rational, bool), b: &(Rational, bool)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 && !b.1)
}

/// Brings a conjunction into normal form, or returns `None` when a
/// contradiction is found.
///
/// Literals are grouped by their variable part scaled to a leading
/// coefficient of 1; each group collapses to one equality or at most one
/// lower and one upper bound. Constant literals are evaluated away. The
/// output is sorted, so equal conjunctions compare equal.
pub(crate) fn normalize(lits: impl IntoIterator<Item = Lit>) -> Option<Conj> {
    let mut groups: BTreeMap<LinTerm, Bounds> = BTreeMap::new();
    for lit in lits {
        if let Some(holds) = lit.holds_constant() {
            if !holds {
                return None;
            }
            continue;
        }
        let lead = lit.term.coeffs().values().next().cloned().expect("non-constant");
        let inv = Rational::one() / &lead;
        let key = LinTerm::from_parts(
            lit.term.coeffs().iter().map(|(v, c)| (v.clone(), c * &inv)),
            Rational::zero(),
        );
        // lead * (key + k/lead) op 0
        let value = -(lit.term.constant_part() * &inv);
        let b = groups.entry(key).or_default();
        match lit.op {
            Op::Eq => match &b.eq {
                Some(e) if *e != value => return None,
                _ => b.eq = Some(value),
            },
            Op::Le | Op::Lt => {
                let bound = (value, lit.op == Op::Lt);
                if lead.is_positive() {
                    if b.hi.as_ref().map_or(true, |h| tighter_hi(&bound, h)) {
                        b.hi = Some(bound);
                    }
                } else if b.lo.as_ref().map_or(true, |l| tighter_lo(&bound, l)) {
                    b.lo = Some(bound);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (key, b) in groups {
        if let Some(e) = b.eq {
            if let Some((l, strict)) = &b.lo {
                if e < *l || (*strict && e == *l) {
                    return None;
                }
            }
            if let Some((h, strict)) = &b.hi {
                if e > *h || (*strict && e == *h) {
                    return None;
                }
            }
            out.push(Lit::new(key.sub(&LinTerm::constant(e)), Op::Eq));
            continue;
        }
        if let (Some((l, ls)), Some((h, hs))) = (&b.lo, &b.hi) {
            if l > h || (l == h && (*ls || *hs)) {
                return None;
            }
            if l == h {
                out.push(Lit::new(key.sub(&LinTerm::constant(l.clone())), Op::Eq));
                continue;
            }
        }
        if let Some((l, strict)) = b.lo {
            // key >= l  <=>  -key + l <= 0
            let op = if strict { Op::Lt } else { Op::Le };
            out.push(Lit::new(key.neg().add(&LinTerm::constant(l)), op));
        }
        if let Some((h, strict)) = b.hi {
            let op = if strict { Op::Lt } else { Op::Le };
            out.push(Lit::new(key.sub(&LinTerm::constant(h)), op));
        }
    }
    out.sort();
    Some(out)
}

pub(crate) fn conj_vars(conj: &[Lit]) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for l in conj {
        l.term.collect_vars(&mut out);
    }
    out
}

/// Eliminates one variable: by substitution when an equality mentions it,
/// otherwise by pairing every lower bound with every upper bound.
pub(crate) fn eliminate_var(conj: &[Lit], x: &Var) -> Option<Conj> {
    let pivot = conj
        .iter()
        .filter(|l| l.op == Op::Eq && l.mentions(x))
        .min_by_key(|l| l.term.coeffs().len());
    if let Some(eq) = pivot {
        // a*x + rest = 0  =>  x = -rest / a
        let a = eq.term.coeff(x);
        let mut rest = eq.term.clone();
        rest.add_coeff(x.clone(), -a.clone());
        let replacement = rest.scale(&(-Rational::one() / a));
        let others = conj
            .iter()
            .filter(|l| *l != eq)
            .map(|l| Lit::new(l.term.substitute(x, &replacement), l.op));
        return normalize(others);
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut keep = Vec::new();
    for l in conj {
        let a = l.term.coeff(x);
        if a.is_zero() {
            keep.push(l.clone());
        } else if a.is_negative() {
            lower.push((l, a));
        } else {
            upper.push((l, a));
        }
    }
    for (lo, al) in &lower {
        for (up, au) in &upper {
            // au * lo + (-al) * up cancels x; both multipliers are positive.
            let term = lo.term.scale(au).add(&up.term.scale(&-al.clone()));
            let op = if lo.op == Op::Lt || up.op == Op::Lt {
                Op::Lt
            } else {
                Op::Le
            };
            keep.push(Lit::new(term, op));
        }
    }
    normalize(keep)
}

fn pick_var(conj: &[Lit], candidates: &BTreeSet<Var>) -> Option<Var> {
    // (has equality, lower bounds, upper bounds) per candidate present
    let mut stats: BTreeMap<&Var, (bool, i64, i64)> = BTreeMap::new();
    for l in conj {
        for (v, a) in l.term.coeffs() {
            if !candidates.contains(v) {
                continue;
            }
            let e = stats.entry(v).or_default();
            match l.op {
                Op::Eq => e.0 = true,
                _ if a.is_negative() => e.1 += 1,
                _ => e.2 += 1,
            }
        }
    }
    let mut best: Option<(bool, i64, &Var)> = None;
    for (v, (has_eq, nl, nu)) in stats {
        let cost = nl * nu - nl - nu;
        let better = match &best {
            None => true,
            Some((beq, bcost, _)) => (has_eq && !beq) || (has_eq == *beq && cost < *bcost),
        };
        if better {
            best = Some((has_eq, cost, v));
        }
    }
    best.map(|(_, _, v)| v.clone())
}

/// `∃vars conj`, as a conjunction, or `None` when infeasible.
pub(crate) fn eliminate_vars(conj: &[Lit], vars: &BTreeSet<Var>) -> Option<Conj> {
    let mut current = normalize(conj.iter().cloned())?;
    while let Some(x) = pick_var(&current, vars) {
        current = eliminate_var(&current, &x)?;
    }
    Some(current)
}

pub(crate) fn feasible(conj: &[Lit]) -> bool {
    let vars = conj_vars(conj);
    eliminate_vars(conj, &vars).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn t(parts: &[(&str, i64)], k: i64) -> LinTerm {
        LinTerm::from_parts(parts.iter().map(|(v, c)| (Var::new(*v), q(*c))), q(k))
    }

    #[test]
    fn parallel_bounds_collapse() {
        // X <= 3, 2X <= 4, X < 2  ~>  X < 2
        let c = normalize(vec![
            Lit::new(t(&[("X", 1)], -3), Op::Le),
            Lit::new(t(&[("X", 2)], -4), Op::Le),
            Lit::new(t(&[("X", 1)], -2), Op::Lt),
        ])
        .unwrap();
        assert_eq!(c, vec![Lit::new(t(&[("X", 1)], -2), Op::Lt)]);
    }

    #[test]
    fn opposite_bounds_meet_in_equality_or_conflict() {
        let c = normalize(vec![
            Lit::new(t(&[("X", 1)], -1), Op::Le),
            Lit::new(t(&[("X", -1)], 1), Op::Le),
        ])
        .unwrap();
        assert_eq!(c, vec![Lit::new(t(&[("X", 1)], -1), Op::Eq)]);
        assert!(normalize(vec![
            Lit::new(t(&[("X", 1)], -1), Op::Lt),
            Lit::new(t(&[("X", -1)], 1), Op::Le),
        ])
        .is_none());
    }

    #[test]
    fn transitivity_by_elimination() {
        // X - Y <= 0, Y - Z <= 0  ~>  X - Z <= 0
        let c = vec![
            Lit::new(t(&[("X", 1), ("Y", -1)], 0), Op::Le),
            Lit::new(t(&[("Y", 1), ("Z", -1)], 0), Op::Le),
        ];
        let out = eliminate_var(&normalize(c).unwrap(), &Var::new("Y")).unwrap();
        assert_eq!(out, vec![Lit::new(t(&[("X", 1), ("Z", -1)], 0), Op::Le)]);
    }

    #[test]
    fn strictness_propagates() {
        // X < Y, Y <= Z  ~>  X < Z
        let c = vec![
            Lit::new(t(&[("X", 1), ("Y", -1)], 0), Op::Lt),
            Lit::new(t(&[("Y", 1), ("Z", -1)], 0), Op::Le),
        ];
        let out = eliminate_var(&normalize(c).unwrap(), &Var::new("Y")).unwrap();
        assert_eq!(out, vec![Lit::new(t(&[("X", 1), ("Z", -1)], 0), Op::Lt)]);
    }

    #[test]
    fn equality_substitution() {
        // X = Y + 1, Y >= 0  ~>  X >= 1
        let c = vec![
            Lit::new(t(&[("X", 1), ("Y", -1)], -1), Op::Eq),
            Lit::new(t(&[("Y", -1)], 0), Op::Le),
        ];
        let out = eliminate_vars(&c, &[Var::new("Y")].into_iter().collect()).unwrap();
        assert_eq!(out, vec![Lit::new(t(&[("X", -1)], 1), Op::Le)]);
    }

    #[test]
    fn infeasible_detected() {
        assert!(!feasible(&[
            Lit::new(t(&[("X", 1), ("Y", -1)], 0), Op::Lt),
            Lit::new(t(&[("Y", 1), ("X", -1)], 0), Op::Lt),
        ]));
        assert!(feasible(&[Lit::new(t(&[("X", 1), ("Y", -1)], 0), Op::Le)]));
    }
}
