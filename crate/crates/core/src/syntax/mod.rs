//! Terms, atoms, constraints, clauses, queries and programs, plus the
//! textual front end.

mod parser;
mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub use parser::{parse_program, parse_program_with, parse_query};
pub use term::{AtomicProp, LinTerm, Rel, Var};

use crate::error::SyntaxError;
use crate::linarith::Solver;

/// A predicate symbol together with its arity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pred {
    name: Arc<str>,
    arity: usize,
}

impl Pred {
    pub fn new(name: impl Into<Arc<str>>, arity: usize) -> Self {
        Pred {
            name: name.into(),
            arity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The projected predicate `p|{i,j}` of arity `positions.len()`.
    pub fn projected(&self, positions: &BTreeSet<usize>) -> Pred {
        let idx: Vec<String> = positions.iter().map(usize::to_string).collect();
        Pred::new(format!("{}|{{{}}}", self.name, idx.join(",")), positions.len())
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl fmt::Debug for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A finite conjunction of atomic propositions; empty means `true`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Constraint(pub Vec<AtomicProp>);

impl Constraint {
    pub fn truth() -> Self {
        Constraint(Vec::new())
    }

    pub fn conjuncts(&self) -> &[AtomicProp] {
        &self.0
    }

    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn and(&self, other: &Constraint) -> Constraint {
        let mut out = self.0.clone();
        out.extend(other.0.iter().cloned());
        Constraint(out)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in &self.0 {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> Constraint {
        Constraint(self.0.iter().map(|a| a.rename(f)).collect())
    }

    pub fn max_index(&self) -> u32 {
        self.0.iter().map(AtomicProp::max_index).max().unwrap_or(0)
    }

    /// `s1 = t1 ∧ … ∧ sn = tn`.
    pub fn equalities(lhs: &[LinTerm], rhs: &[LinTerm]) -> Constraint {
        debug_assert_eq!(lhs.len(), rhs.len());
        Constraint(
            lhs.iter()
                .zip(rhs)
                .map(|(s, t)| AtomicProp::eq(s.clone(), t.clone()))
                .collect(),
        )
    }
}

impl From<Vec<AtomicProp>> for Constraint {
    fn from(v: Vec<AtomicProp>) -> Self {
        Constraint(v)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<LinTerm>,
}

impl Atom {
    pub fn new(pred: Pred, args: Vec<LinTerm>) -> Self {
        debug_assert_eq!(pred.arity(), args.len());
        Atom { pred, args }
    }

    pub fn from_vars(pred: Pred, vars: &[Var]) -> Self {
        Atom::new(pred, vars.iter().cloned().map(LinTerm::var).collect())
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|t| t.rename(f)).collect(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in &self.args {
            t.collect_vars(&mut out);
        }
        out
    }

    pub fn max_index(&self) -> u32 {
        self.args.iter().map(LinTerm::max_index).max().unwrap_or(0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `⟨A | d⟩`: an atom constrained by a conjunction. Denotes the set of
/// ground atoms obtained from valuations satisfying `d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query {
    pub atom: Atom,
    pub constraint: Constraint,
}

impl Query {
    pub fn new(atom: Atom, constraint: Constraint) -> Self {
        Query { atom, constraint }
    }

    pub fn pred(&self) -> &Pred {
        &self.atom.pred
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = self.atom.vars();
        v.extend(self.constraint.vars());
        v
    }

    pub fn max_index(&self) -> u32 {
        self.atom.max_index().max(self.constraint.max_index())
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> Query {
        Query {
            atom: self.atom.rename(f),
            constraint: self.constraint.rename(f),
        }
    }

    /// A variant with every variable moved into `generation`.
    pub fn rename_apart(&self, generation: u32) -> Query {
        self.rename(&mut |v| v.renamed(generation))
    }
}

/// Renders as `p(t1, …, tn) : d`, the same notation the query parser reads.
impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.atom, self.constraint)
    }
}

impl fmt::Debug for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{} | {}>", self.atom, self.constraint)
    }
}

/// A normalized binary clause `p(X̃) ← c ◇ q(Ỹ)`.
///
/// `head_vars` and `body_vars` are disjoint sequences of distinct variables
/// and `constraint` is satisfiable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    head_pred: Pred,
    head_vars: Vec<Var>,
    constraint: Constraint,
    body_pred: Pred,
    body_vars: Vec<Var>,
}

impl Clause {
    /// Builds an already-flat clause, checking every invariant.
    pub fn new(
        head_pred: Pred,
        head_vars: Vec<Var>,
        constraint: Constraint,
        body_pred: Pred,
        body_vars: Vec<Var>,
    ) -> Result<Self, SyntaxError> {
        Self::new_with(&Solver::default(), head_pred, head_vars, constraint, body_pred, body_vars)
    }

    pub fn new_with(
        solver: &Solver,
        head_pred: Pred,
        head_vars: Vec<Var>,
        constraint: Constraint,
        body_pred: Pred,
        body_vars: Vec<Var>,
    ) -> Result<Self, SyntaxError> {
        if head_pred.arity() != head_vars.len() || body_pred.arity() != body_vars.len() {
            return Err(SyntaxError::Malformed("argument count differs from arity".into()));
        }
        let mut seen = BTreeSet::new();
        for v in head_vars.iter().chain(&body_vars) {
            if !seen.insert(v.clone()) {
                return Err(SyntaxError::Malformed(format!(
                    "variable {v} repeated in head/body arguments"
                )));
            }
        }
        let clause = Clause {
            head_pred,
            head_vars,
            constraint,
            body_pred,
            body_vars,
        };
        if !solver.satisfiable(&clause.constraint) {
            return Err(SyntaxError::Unsatisfiable {
                clause: 0,
                line: 0,
                text: clause.to_string(),
            });
        }
        Ok(clause)
    }

    pub fn head_pred(&self) -> &Pred {
        &self.head_pred
    }

    pub fn body_pred(&self) -> &Pred {
        &self.body_pred
    }

    pub fn head_vars(&self) -> &[Var] {
        &self.head_vars
    }

    pub fn body_vars(&self) -> &[Var] {
        &self.body_vars
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn is_recursive(&self) -> bool {
        self.head_pred == self.body_pred
    }

    pub fn head_atom(&self) -> Atom {
        Atom::from_vars(self.head_pred.clone(), &self.head_vars)
    }

    pub fn body_atom(&self) -> Atom {
        Atom::from_vars(self.body_pred.clone(), &self.body_vars)
    }

    /// `⟨H | c⟩`.
    pub fn head_query(&self) -> Query {
        Query::new(self.head_atom(), self.constraint.clone())
    }

    /// `⟨B | c⟩`.
    pub fn body_query(&self) -> Query {
        Query::new(self.body_atom(), self.constraint.clone())
    }

    /// Constraint variables occurring in neither the head nor the body atom.
    pub fn local_vars(&self) -> BTreeSet<Var> {
        let mut vars = self.constraint.vars();
        for v in self.head_vars.iter().chain(&self.body_vars) {
            vars.remove(v);
        }
        vars
    }

    pub fn max_index(&self) -> u32 {
        self.head_vars
            .iter()
            .chain(&self.body_vars)
            .map(Var::index)
            .max()
            .unwrap_or(0)
            .max(self.constraint.max_index())
    }

    /// A variant with every variable moved into `generation`.
    pub fn rename_apart(&self, generation: u32) -> Clause {
        let mut f = |v: &Var| v.renamed(generation);
        Clause {
            head_pred: self.head_pred.clone(),
            head_vars: self.head_vars.iter().map(&mut f).collect(),
            constraint: self.constraint.rename(&mut f),
            body_pred: self.body_pred.clone(),
            body_vars: self.body_vars.iter().map(&mut f).collect(),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} <- {} <> {}.",
            self.head_atom(),
            self.constraint,
            self.body_atom()
        )
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Flattens `head ← c ◇ body` into a clause whose head and body arguments
/// are disjoint sequences of distinct variables.
///
/// Head argument `i` is kept when it is a variable not seen earlier in the
/// head; otherwise it is replaced by a fresh variable `Xi` and `Xi = t` is
/// added. Body arguments are kept when they are variables absent from the
/// head and not seen earlier in the body; otherwise `Yi = t` is added.
pub fn normalize_clause(head: &Atom, c: &Constraint, body: &Atom) -> Result<Clause, SyntaxError> {
    normalize_clause_with(&Solver::default(), head, c, body)
}

pub fn normalize_clause_with(
    solver: &Solver,
    head: &Atom,
    c: &Constraint,
    body: &Atom,
) -> Result<Clause, SyntaxError> {
    let mut used: BTreeSet<Var> = c.vars();
    used.extend(head.vars());
    used.extend(body.vars());
    let fresh = |base: String, used: &mut BTreeSet<Var>| {
        let mut name = base;
        while used.contains(&Var::new(name.as_str())) {
            name.push('_');
        }
        let v = Var::new(name);
        used.insert(v.clone());
        v
    };

    let mut extra = Vec::new();
    let mut head_vars = Vec::with_capacity(head.args.len());
    let mut head_seen = BTreeSet::new();
    for (i, t) in head.args.iter().enumerate() {
        match t.as_var() {
            Some(v) if head_seen.insert(v.clone()) => head_vars.push(v.clone()),
            _ => {
                let x = fresh(format!("X{}", i + 1), &mut used);
                extra.push(AtomicProp::eq(LinTerm::var(x.clone()), t.clone()));
                head_vars.push(x);
            }
        }
    }
    let mut body_vars = Vec::with_capacity(body.args.len());
    let mut body_seen = BTreeSet::new();
    for (i, t) in body.args.iter().enumerate() {
        match t.as_var() {
            Some(v) if !head_seen.contains(v) && body_seen.insert(v.clone()) => {
                body_vars.push(v.clone())
            }
            _ => {
                let y = fresh(format!("Y{}", i + 1), &mut used);
                extra.push(AtomicProp::eq(LinTerm::var(y.clone()), t.clone()));
                body_vars.push(y);
            }
        }
    }
    let mut conj = c.0.clone();
    conj.extend(extra);
    Clause::new_with(
        solver,
        head.pred.clone(),
        head_vars,
        Constraint(conj),
        body.pred.clone(),
        body_vars,
    )
}

/// An ordered list of normalized clauses with one arity per predicate name.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, SyntaxError> {
        let mut arities: BTreeMap<&str, usize> = BTreeMap::new();
        for c in &clauses {
            for p in [c.head_pred(), c.body_pred()] {
                let expected = *arities.entry(p.name()).or_insert(p.arity());
                if expected != p.arity() {
                    return Err(SyntaxError::ArityMismatch {
                        pred: p.name().to_string(),
                        expected,
                        found: p.arity(),
                        line: 0,
                        column: 0,
                    });
                }
            }
        }
        Ok(Program { clauses })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn predicate(&self, name: &str) -> Option<&Pred> {
        self.clauses
            .iter()
            .flat_map(|c| [c.head_pred(), c.body_pred()])
            .find(|p| p.name() == name)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
