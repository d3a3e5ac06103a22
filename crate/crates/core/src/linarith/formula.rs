use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::LinError;
use crate::linarith::Rational;
use crate::syntax::{AtomicProp, Constraint, LinTerm, Var};

/// A valuation of variables into the rationals.
pub type Valuation = BTreeMap<Var, Rational>;

/// First-order formula over linear rational constraints.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(AtomicProp),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: AtomicProp) -> Formula {
        Formula::Atom(a)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::And(vec![
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        ])
    }

    /// `∃vars f`; no binder is emitted for an empty variable list.
    pub fn exists(vars: impl IntoIterator<Item = Var>, f: Formula) -> Formula {
        let vars: Vec<Var> = vars.into_iter().collect();
        if vars.is_empty() {
            f
        } else {
            Formula::Exists(vars, Box::new(f))
        }
    }

    pub fn forall(vars: impl IntoIterator<Item = Var>, f: Formula) -> Formula {
        let vars: Vec<Var> = vars.into_iter().collect();
        if vars.is_empty() {
            f
        } else {
            Formula::Forall(vars, Box::new(f))
        }
    }

    pub fn from_constraint(c: &Constraint) -> Formula {
        match c.conjuncts() {
            [] => Formula::True,
            [a] => Formula::Atom(a.clone()),
            many => Formula::And(many.iter().cloned().map(Formula::Atom).collect()),
        }
    }

    /// The conjunction of atoms this formula is, if it is one.
    pub fn as_constraint(&self) -> Option<Constraint> {
        match self {
            Formula::True => Some(Constraint::truth()),
            Formula::Atom(a) => Some(Constraint(vec![a.clone()])),
            Formula::And(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(f.as_constraint()?.0);
                }
                Some(Constraint(out))
            }
            _ => None,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                let mut vs = BTreeSet::new();
                a.collect_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                f.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Largest variable index anywhere in the formula, bound or free.
    pub fn max_index(&self) -> u32 {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Atom(a) => a.max_index(),
            Formula::Not(f) => f.max_index(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::max_index).max().unwrap_or(0),
            Formula::Implies(a, b) => a.max_index().max(b.max_index()),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => vs
                .iter()
                .map(Var::index)
                .max()
                .unwrap_or(0)
                .max(f.max_index()),
        }
    }

    /// Substitutes constants for free variables. Bound occurrences are left
    /// untouched.
    pub fn instantiate(&self, v: &Valuation) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => {
                let mut a = a.clone();
                for (x, q) in v {
                    a = a.substitute(x, &LinTerm::constant(q.clone()));
                }
                Formula::Atom(a)
            }
            Formula::Not(f) => Formula::not(f.instantiate(v)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.instantiate(v)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.instantiate(v)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.instantiate(v), b.instantiate(v)),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let inner: Valuation = v
                    .iter()
                    .filter(|(x, _)| !vs.contains(x))
                    .map(|(x, q)| (x.clone(), q.clone()))
                    .collect();
                let body = Box::new(f.instantiate(&inner));
                match self {
                    Formula::Exists(..) => Formula::Exists(vs.clone(), body),
                    _ => Formula::Forall(vs.clone(), body),
                }
            }
        }
    }
}

/// Truth value of a quantifier-free formula under `v`.
pub fn eval(f: &Formula, v: &Valuation) -> Result<bool, LinError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => {
            let lookup = |x: &Var| v.get(x);
            let lhs = a.lhs.eval_with(lookup).map_err(LinError::UnboundVariable)?;
            let rhs = a.rhs.eval_with(lookup).map_err(LinError::UnboundVariable)?;
            a.rel.holds(&lhs, &rhs)
        }
        Formula::Not(g) => !eval(g, v)?,
        Formula::And(fs) => {
            for g in fs {
                if !eval(g, v)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval(g, v)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(a, b) => !eval(a, v)? || eval(b, v)?,
        Formula::Exists(..) | Formula::Forall(..) => return Err(LinError::Quantified),
    })
}

fn write_vars(f: &mut fmt::Formatter<'_>, vs: &[Var]) -> fmt::Result {
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

fn write_joined(f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str) -> fmt::Result {
    for (i, g) in fs.iter().enumerate() {
        if i > 0 {
            write!(f, "{sep}")?;
        }
        match g {
            Formula::Atom(_) | Formula::True | Formula::False | Formula::Not(_) => write!(f, "{g}")?,
            _ => write!(f, "({g})")?,
        }
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => match **g {
                Formula::Atom(_) | Formula::True | Formula::False => write!(f, "~{g}"),
                _ => write!(f, "~({g})"),
            },
            Formula::And(fs) if fs.is_empty() => write!(f, "true"),
            Formula::Or(fs) if fs.is_empty() => write!(f, "false"),
            Formula::And(fs) => write_joined(f, fs, ", "),
            Formula::Or(fs) => write_joined(f, fs, " ; "),
            Formula::Implies(a, b) => write!(f, "({a}) -> ({b})"),
            Formula::Exists(vs, g) => {
                write!(f, "exists ")?;
                write_vars(f, vs)?;
                write!(f, ". ({g})")
            }
            Formula::Forall(vs, g) => {
                write!(f, "forall ")?;
                write_vars(f, vs)?;
                write!(f, ". ({g})")
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
