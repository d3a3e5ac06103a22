//! Variables, linear terms and atomic propositions over the rationals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::linarith::Rational;

/// A logic variable. User-written variables carry index 0; renamed copies
/// carry the generation they were renamed with.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    name: Arc<str>,
    index: u32,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>) -> Self {
        Var {
            name: name.into(),
            index: 0,
        }
    }

    pub fn indexed(name: impl Into<Arc<str>>, index: u32) -> Self {
        Var {
            name: name.into(),
            index,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Injective renaming into `generation`.
    ///
    /// `(X, 0)` becomes `(X, g)`; `(X, i)` with `i > 0` becomes `("X#i", g)`.
    /// Names containing `#` only ever carry a positive index, so images of
    /// distinct variables never collide.
    pub fn renamed(&self, generation: u32) -> Var {
        if self.index == 0 {
            Var::indexed(self.name.clone(), generation)
        } else {
            Var::indexed(format!("{}#{}", self.name, self.index), generation)
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}#{}", self.name, self.index)
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `Σ coeff·var + constant`, with no zero coefficients stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinTerm {
    coeffs: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl LinTerm {
    pub fn zero() -> Self {
        LinTerm::default()
    }

    pub fn constant(value: Rational) -> Self {
        LinTerm {
            coeffs: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn int(value: i64) -> Self {
        LinTerm::constant(Rational::from_integer(value.into()))
    }

    pub fn var(v: Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rational::one());
        LinTerm {
            coeffs,
            constant: Rational::zero(),
        }
    }

    pub fn from_parts(coeffs: impl IntoIterator<Item = (Var, Rational)>, constant: Rational) -> Self {
        let mut t = LinTerm::constant(constant);
        for (v, c) in coeffs {
            t.add_coeff(v, c);
        }
        t
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, Rational> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff(&self, v: &Var) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_var(&self) -> Option<&Var> {
        if self.constant.is_zero() && self.coeffs.len() == 1 {
            let (v, c) = self.coeffs.iter().next()?;
            if c.is_one() {
                return Some(v);
            }
        }
        None
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn add_coeff(&mut self, v: Var, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn add(&self, other: &LinTerm) -> LinTerm {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_coeff(v.clone(), c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &LinTerm) -> LinTerm {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, k: &Rational) -> LinTerm {
        if k.is_zero() {
            return LinTerm::zero();
        }
        LinTerm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
            constant: &self.constant * k,
        }
    }

    pub fn neg(&self) -> LinTerm {
        self.scale(&-Rational::one())
    }

    /// Replaces `v` by `replacement`.
    pub fn substitute(&self, v: &Var, replacement: &LinTerm) -> LinTerm {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.coeffs.remove(v);
                rest.add(&replacement.scale(c))
            }
        }
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (f(v), c.clone())).collect(),
            constant: self.constant.clone(),
        }
    }

    /// Evaluates under `lookup`, failing on the first unbound variable.
    pub fn eval_with<'a>(
        &'a self,
        lookup: impl Fn(&Var) -> Option<&'a Rational>,
    ) -> Result<Rational, Var> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            match lookup(v) {
                Some(x) => acc += c * x,
                None => return Err(v.clone()),
            }
        }
        Ok(acc)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        out.extend(self.coeffs.keys().cloned());
    }

    pub fn max_index(&self) -> u32 {
        self.coeffs.keys().map(Var::index).max().unwrap_or(0)
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write_rational(f, &mag)?;
                write!(f, "*{v}")?;
            }
            first = false;
        }
        if first {
            if self.constant.is_negative() {
                write!(f, "-")?;
            }
            write_rational(f, &self.constant.abs())
        } else if self.constant.is_zero() {
            Ok(())
        } else {
            write!(f, "{}", if self.constant.is_negative() { " - " } else { " + " })?;
            write_rational(f, &self.constant.abs())
        }
    }
}

impl fmt::Debug for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Le => lhs <= rhs,
            Rel::Lt => lhs < rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }

    /// The relation obtained by swapping both sides.
    pub fn flipped(self) -> Rel {
        match self {
            Rel::Eq => Rel::Eq,
            Rel::Le => Rel::Ge,
            Rel::Lt => Rel::Gt,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }
}

/// `lhs rel rhs`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicProp {
    pub lhs: LinTerm,
    pub rel: Rel,
    pub rhs: LinTerm,
}

impl AtomicProp {
    pub fn new(lhs: LinTerm, rel: Rel, rhs: LinTerm) -> Self {
        AtomicProp { lhs, rel, rhs }
    }

    pub fn eq(lhs: LinTerm, rhs: LinTerm) -> Self {
        AtomicProp::new(lhs, Rel::Eq, rhs)
    }

    /// Canonical `term rel 0` with `rel ∈ {=, ≤, <}`.
    pub fn canonical(&self) -> (LinTerm, Rel) {
        match self.rel {
            Rel::Eq | Rel::Le | Rel::Lt => (self.lhs.sub(&self.rhs), self.rel),
            Rel::Ge => (self.rhs.sub(&self.lhs), Rel::Le),
            Rel::Gt => (self.rhs.sub(&self.lhs), Rel::Lt),
        }
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> AtomicProp {
        AtomicProp {
            lhs: self.lhs.rename(f),
            rel: self.rel,
            rhs: self.rhs.rename(f),
        }
    }

    pub fn substitute(&self, v: &Var, t: &LinTerm) -> AtomicProp {
        AtomicProp {
            lhs: self.lhs.substitute(v, t),
            rel: self.rel,
            rhs: self.rhs.substitute(v, t),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }

    pub fn max_index(&self) -> u32 {
        self.lhs.max_index().max(self.rhs.max_index())
    }

    /// Builds a readable proposition from `term rel 0`: positive-coefficient
    /// variables on the left, the rest moved right.
    pub fn from_canonical(term: &LinTerm, rel: Rel) -> AtomicProp {
        let mut lhs = LinTerm::zero();
        let mut rhs = LinTerm::zero();
        for (v, c) in term.coeffs() {
            if c.is_positive() {
                lhs.add_coeff(v.clone(), c.clone());
            } else {
                rhs.add_coeff(v.clone(), -c.clone());
            }
        }
        let k = -term.constant_part().clone();
        if lhs.is_constant() && !rhs.is_constant() {
            // 0 rel rhs + k  <=>  rhs (flipped rel) -k
            AtomicProp::new(rhs, rel.flipped(), LinTerm::constant(-k))
        } else {
            rhs.add_constant(&k);
            AtomicProp::new(lhs, rel, rhs)
        }
    }
}

impl fmt::Display for AtomicProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.symbol(), self.rhs)
    }
}

impl fmt::Debug for AtomicProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
